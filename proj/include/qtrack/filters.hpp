#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "qtrack/model.hpp"
#include "qtrack/record.hpp"
#include "qtrack/riccati.hpp"

namespace qtrack {

enum class StateKind { predicted, retrodicted };

/// Isotropic Gaussian state: mean quadrature pair and scalar variance.
struct GaussianState {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double variance = 0.5;
  StateKind kind = StateKind::predicted;
  double t = 0.0;

  double purity() const { return 1.0 / (2.0 * variance); }
};

/// Conditional mean trajectory plus the (ensemble-shared) deterministic
/// variance schedule. Conditioning is described by a switch index: samples
/// before uncond_from used the measurement record, samples from uncond_from
/// on evolve deterministically.
struct StateTrajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> mean_x;
  std::vector<double> mean_y;
  std::shared_ptr<const std::vector<double>> variance;
  StateKind kind = StateKind::predicted;
  std::size_t uncond_from = std::numeric_limits<std::size_t>::max();

  std::size_t size() const { return mean_x.size(); }
  bool conditioned(std::size_t k) const { return k < uncond_from; }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double var(std::size_t k) const { return (*variance)[k]; }
  GaussianState at(std::size_t k) const;
  std::size_t index_of(double t) const;  // nearest grid index, range-checked
};

/// Forward conditional-state filter (Euler-Maruyama form):
///   r_{k+1} = r_k - (gm/2) r_k dt + sqrt(4 gmeas) V_k (i_k dt - sqrt(4 gmeas) r_k dt)
/// with the variance schedule from the riccati module (gains use the
/// step-averaged variance), initial mean (0,0), V(0) = v0 (v_bath if <= 0).
StateTrajectory predict(const MeasurementRecord& record, const DerivedRates& p,
                        double v0 = 0.0);

/// Backward effect-operator filter: mirrors predict with the damping sign
/// flipped, iterating from the final sample toward the first. Final mean
/// (0,0), V_E(t_end) = vE_final (v_bath if <= 0). The step from t_{k+1} to
/// t_k consumes record sample k, so prediction at k uses samples < k and
/// retrodiction at k uses samples >= k.
StateTrajectory retrodict(const MeasurementRecord& record, const DerivedRates& p,
                          double vE_final = 0.0);

/// Copies traj and, from t_star on, propagates the mean deterministically,
///   r(t) = r(t*) exp(-gm (t - t*)/2),
/// with the variance relaxing toward v_bath (measurement rate set to zero).
StateTrajectory predict_unconditioned(const StateTrajectory& traj,
                                      const DerivedRates& p, double t_star);

/// Steady-state convolution equivalent of the recursions: the mean is a
/// discrete convolution of the record with the one-sided geometric kernel
/// whose per-step ratio (1 - alpha dt) matches the recursion exactly, and
/// the variance is pinned at its steady value. Valid once edge transients
/// (~5/alpha) are discarded.
StateTrajectory steady_kernel_filter(const MeasurementRecord& record,
                                     const DerivedRates& p, Direction direction);

/// Innovation sequence of the forward filter, nu_k = i_k dt - sqrt(4 gmeas) r_k dt,
/// per channel. White with variance ~dt when record and filter agree.
struct Innovations {
  std::vector<double> x;
  std::vector<double> y;
  double dt = 0.0;
};
Innovations innovations(const MeasurementRecord& record, const StateTrajectory& pred,
                        const DerivedRates& p);

void write_trajectory_csv(const StateTrajectory& traj, const std::string& path);
void write_trajectory(const StateTrajectory& traj, std::uint64_t seed,
                      std::uint64_t params_hash, const std::string& path);

}  // namespace qtrack
