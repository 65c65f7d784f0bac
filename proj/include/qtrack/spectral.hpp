#pragma once

#include <optional>
#include <string>

#include "qtrack/demod.hpp"
#include "qtrack/model.hpp"

namespace qtrack {

/// The four ensemble statistics evaluated in the frequency domain.
struct TableS1 {
  double pred_var = 0.0;   // <r_fwd r_fwd>
  double retro_var = 0.0;  // <r_bwd r_bwd>
  double cross = 0.0;      // <r_fwd r_bwd>
  double sigma2 = 0.0;     // pred + retro - 2 cross
};

/// Frequency-domain model of the steady-state estimation chain.
///
/// Spectral convention: <f(t) f(t+tau)> = (1/2pi) Int S(w) e^{-i w tau} dw,
/// so a shot-noise-normalized record has S = 1 background and the quadrature
/// spectrum is the Lorentzian S_xx(w) = v_bath gm / ((gm/2)^2 + w^2) whose
/// sum rule (1/2pi) Int S_xx dw = v_bath fixes the normalization.
///
/// Steady-state filters act as kernels K (causal) and Kbar (anticausal) with
/// transfer functions sqrt(4 gmeas) V/(alpha - i w) and
/// sqrt(4 gmeas) V_E/(alpha + i w); the demodulation low-pass enters through
/// its baseband magnitude |D(w)|^2 only.
class SpectralModel {
 public:
  SpectralModel(const DerivedRates& rates,
                std::optional<DemodFilterSpec> filter = DemodFilterSpec{});

  const DerivedRates& rates() const { return rates_; }

  double s_xx(double w) const;
  double s_ii(double w) const;        // 1 + 4 gmeas S_xx
  double d_mag2(double w) const;      // |D|^2, 1 when no filter configured
  double k_mag2(double w) const;      // |K|^2
  double kbar_mag2(double w) const;   // |Kbar|^2
  double cross_re(double w) const;    // Re K[-w] Kbar[w]

  /// (1/2pi) Int S_xx dw by the module quadrature; equals v_bath.
  double sxx_sum_rule() const;

  /// refine > 1 splits every quadrature panel for convergence checks.
  TableS1 integrate(bool with_filter, int refine = 1) const;

 private:
  DerivedRates rates_;
  std::optional<DemodFilterSpec> filter_;
};

/// Evaluates the three spectral integrals and sigma^2, with or without the
/// demodulation filter. Self-validated: the quadrature is repeated at twice
/// the panel resolution and a resolution error is thrown if any statistic
/// moves by more than 0.1%.
TableS1 table_s1(const SpectralModel& model, bool with_filter);

/// sigma^2(no filter) / sigma^2(with filter): the multiplicative correction
/// applied to ensemble statistics measured through the demodulation chain.
double filter_correction(const SpectralModel& model);

void write_table_s1_csv(const TableS1& without_filter,
                        const std::optional<TableS1>& with_filter,
                        const std::string& path);

}  // namespace qtrack
