#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace qtrack {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
inline double rad_to_hz(double w) { return w / kTwoPi; }

/// Cavity-side parameters carried for documentation. A helper derives the
/// backaction and measurement rates from (g0, kappa, n_cav) when the direct
/// rates are absent; nothing else consumes these values.
struct Provenance {
  std::optional<double> g0;             // rad/s
  std::optional<double> kappa;          // rad/s
  std::optional<double> n_cav;
  std::optional<double> eta_c;
  std::optional<double> q_factor;
  std::optional<double> temperature_k;
  std::optional<double> m_eff_kg;
  std::optional<double> x_zpf_m;
  std::optional<double> detuning;       // rad/s; accepted, ignored by dynamics
};

/// Physical rates defining the measurement problem. Internal unit system:
/// hbar = 1, quadratures in zero-point units (ground-state variance 1/2),
/// all rates in rad/s. Config files accept Hz and are converted on load.
struct ModelParams {
  double omega_m = 0.0;     // mechanical resonance, rad/s
  double gamma_m = 0.0;     // effective energy damping, rad/s
  double n_th = 0.0;        // effective bath occupancy
  double gamma_qba = 0.0;   // quantum backaction rate, rad/s
  double gamma_meas = 0.0;  // measurement rate, rad/s
  double eta_det = 1.0;     // detection efficiency, (0, 1]
  Provenance provenance;

  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;

  /// Identifier of the six core rates; stamped into records so filters can
  /// reject records generated under different parameters.
  std::uint64_t hash() const;
};

/// Quantities derived from ModelParams that every downstream module consumes.
struct DerivedRates {
  double omega_m = 0.0;
  double gamma_m = 0.0;
  double n_th = 0.0;
  double gamma_qba = 0.0;
  double gamma_meas = 0.0;
  double eta_det = 1.0;

  double gamma_th = 0.0;    // gamma_m * n_th
  double diffusion = 0.0;   // gamma_m*(n_th + 1/2) + gamma_qba, rad/s
  double v_bath = 0.0;      // n_th + 1/2 + gamma_qba/gamma_m
  double eta_meas = 0.0;    // gamma_meas / (gamma_qba + gamma_th)
  double v_steady = 0.0;    // steady conditional variance
  double v_e_steady = 0.0;  // v_steady + gamma_m/(4 gamma_meas)
  double alpha = 0.0;       // gamma_m/2 + 4 gamma_meas v_steady, rad/s
  double lambda = 0.0;      // 4 gamma_meas v_e_steady - gamma_m/2, rad/s
  std::uint64_t params_hash = 0;
};

/// Validates p and computes all derived rates. v_steady is evaluated in the
/// cancellation-free form 2*v_bath / (1 + sqrt(1 + 16 v_bath g_meas/g_m)),
/// which stays accurate down to gamma_meas -> 0.
DerivedRates derive_rates(const ModelParams& p);

/// Parses a JSON config document. Frequencies are given in Hz (keys end in
/// _hz) and converted to rad/s. Unknown keys are rejected. gamma_qba_hz and
/// gamma_meas_hz may be omitted when the provenance block supplies g0_hz,
/// kappa_hz and n_cav.
ModelParams params_from_config(const std::string& document);
ModelParams params_from_config_file(const std::string& path);

std::string params_to_config(const ModelParams& p);

}  // namespace qtrack
