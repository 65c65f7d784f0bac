#pragma once

#include <span>
#include <string>
#include <vector>

#include "qtrack/ensemble.hpp"
#include "qtrack/filters.hpp"
#include "qtrack/model.hpp"

namespace qtrack {

/// Ensemble statistics of the prediction-retrodiction comparison at a fixed
/// time. v_impl = sigma2 - v_e_steady is the implied conditional variance;
/// purity = 1/(2 v_impl); n_cond = v_impl - 1/2.
struct VerificationReport {
  std::size_t n_realizations = 0;
  double t0 = 0.0;
  double sigma2 = 0.0;       // mean of the diagonal covariance entries
  double sigma2_xx = 0.0;
  double sigma2_yy = 0.0;
  double sigma2_xy = 0.0;
  double sigma2_stderr = 0.0;
  double sigma2_raw = 0.0;   // before any filter correction
  double v_impl = 0.0;
  double purity = 0.0;
  double n_cond = 0.0;
  bool correction_applied = false;
  double correction_factor = 1.0;

  std::string to_json() const;
};

/// Covariance of r_fwd(t0) - r_bwd(t0) over the ensemble (unbiased, N-1).
/// correction_factor multiplies the raw sigma^2 when the records passed
/// through a demodulation filter; pass 1.0 otherwise. Throws when fewer than
/// two realizations are supplied; requires >= 100 for a steady report.
VerificationReport relative_variance(std::span<const StateTrajectory> pred,
                                     std::span<const StateTrajectory> retro,
                                     double t0, const DerivedRates& rates,
                                     double correction_factor = 1.0);

/// Ensemble variance of the retrodicted mean alone at t0; equals
/// 4 (gmeas/gm) V_E^2 = v_bath + v_e_steady in steady state.
double unconditional_variance(std::span<const StateTrajectory> retro, double t0);

/// sigma^2(t0) against the deterministic expectation. theory is
/// V(t0) + V_E for collapse curves and the rethermalization form for
/// decoherence curves; uncond tracks Var[r_bwd] on the same grid.
struct CollapseCurve {
  std::vector<double> t0;
  std::vector<double> sigma2;
  std::vector<double> stderr_;
  std::vector<double> theory;
  std::vector<double> uncond;
};

/// Measurement-induced collapse: predictions start at t = 0 from v_bath,
/// retrodictions from the segment end; sigma^2 on the given grid.
CollapseCurve collapse_curve(const ModelParams& p, const EnsembleConfig& cfg,
                             std::span<const double> t0_grid);

/// Decoherence after conditioning stops at t_star: predictions propagate
/// deterministically past t_star and sigma^2(t) rises toward v_bath as
///   V + V_E + 4 (gmeas/gm) V^2 (1 - exp(-gm (t - t_star))).
CollapseCurve decoherence_curve(const ModelParams& p, double t_star,
                                const EnsembleConfig& cfg,
                                std::span<const double> t_grid);

double decoherence_theory(const DerivedRates& r, double t_minus_tstar);

void write_curve_csv(const CollapseCurve& c, const std::string& path);

}  // namespace qtrack
