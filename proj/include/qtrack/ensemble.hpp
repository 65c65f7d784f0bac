#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qtrack/demod.hpp"
#include "qtrack/filters.hpp"
#include "qtrack/model.hpp"

namespace qtrack {

/// Resolve a worker count: request > 0 wins, then QTRACK_THREADS, then
/// hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(0..n-1) on a worker pool. Work items must not depend on execution
/// order; results are deterministic because all randomness is keyed by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct EnsembleConfig {
  std::size_t n_segments = 1000;
  double dt = 1e-6;           // baseband sample interval
  double duration = 3.2e-3;   // segment length, seconds
  std::uint64_t seed = 1;
  int threads = 0;            // 0 = resolve from env/hardware
  double v0 = 0.0;            // forward initial variance; <= 0 means v_bath
  double vE_final = 0.0;      // backward final variance; <= 0 means v_bath
};

/// Per-ensemble truth-error accumulators over the steady-state window.
struct TruthErrorStats {
  double sum_sq_fwd = 0.0;   // sum (x - r_fwd)^2
  double sum_sq_bwd = 0.0;   // sum (x - r_bwd)^2
  std::uint64_t count = 0;

  double mse_fwd() const { return count ? sum_sq_fwd / static_cast<double>(count) : 0.0; }
  double mse_bwd() const { return count ? sum_sq_bwd / static_cast<double>(count) : 0.0; }
};

/// Pooled innovation autocorrelation, lags 0..max_lag, steady window only.
struct InnovationStats {
  std::vector<double> lag_sums;  // sum nu_k nu_{k+L}
  std::uint64_t n_products = 0;  // pairs per lag (lag 0 count)
  double sum_sq = 0.0;           // sum nu_k^2
  std::uint64_t n_samples = 0;

  double variance() const { return n_samples ? sum_sq / static_cast<double>(n_samples) : 0.0; }
  double autocorr(std::size_t lag) const;
  double sigma_band() const;     // 1/sqrt(n at lag), white-noise stderr
};

struct Ensemble {
  std::vector<StateTrajectory> pred;
  std::vector<StateTrajectory> retro;
  TruthErrorStats truth_err;
  InnovationStats innov;
  double dt = 0.0;
  double steady_lo = 0.0;  // steady-state window used for the accumulators
  double steady_hi = 0.0;
};

struct BasebandOptions {
  bool collect_innovations = false;
  std::size_t innovation_max_lag = 100;
};

/// Full baseband pipeline per segment: truth, record, forward and backward
/// filters. Deterministic per (seed, segment) independent of thread count.
Ensemble run_baseband_ensemble(const ModelParams& p, const EnsembleConfig& cfg,
                               const BasebandOptions& opt = {});

struct CarrierOptions {
  double fs_mult = 16.0;       // carrier rate as multiple of omega_m/2pi
  DemodFilterSpec filter{};
  int decim = 0;               // 0 = auto
};

/// Carrier pipeline per segment: truth, carrier photocurrent, IQ
/// demodulation, then the same filters on the demodulated record.
Ensemble run_carrier_ensemble(const ModelParams& p, const EnsembleConfig& cfg,
                              const CarrierOptions& opt = {});

}  // namespace qtrack
