#include "qtrack/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "qtrack/simulate.hpp"

namespace qtrack {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QTRACK_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double InnovationStats::autocorr(std::size_t lag) const {
  if (lag >= lag_sums.size() || n_products == 0 || lag_sums[0] == 0.0) return 0.0;
  return lag_sums[lag] / lag_sums[0];
}

double InnovationStats::sigma_band() const {
  return n_products ? 1.0 / std::sqrt(static_cast<double>(n_products)) : 0.0;
}

namespace {

struct SegmentResult {
  StateTrajectory pred;
  StateTrajectory retro;
  double sum_sq_fwd = 0.0;
  double sum_sq_bwd = 0.0;
  std::uint64_t te_count = 0;
  std::vector<double> innov_lag_sums;
  std::uint64_t innov_products = 0;
  double innov_sum_sq = 0.0;
  std::uint64_t innov_samples = 0;
};

void accumulate_innovations(const Innovations& nu, std::size_t lo, std::size_t hi,
                            std::size_t max_lag, SegmentResult& out) {
  out.innov_lag_sums.assign(max_lag + 1, 0.0);
  if (hi <= lo + max_lag + 1) return;
  for (const std::vector<double>* ch : {&nu.x, &nu.y}) {
    const std::vector<double>& v = *ch;
    for (std::size_t k = lo; k + max_lag < hi; ++k)
      for (std::size_t lag = 0; lag <= max_lag; ++lag)
        out.innov_lag_sums[lag] += v[k] * v[k + lag];
    for (std::size_t k = lo; k < hi; ++k) out.innov_sum_sq += v[k] * v[k];
  }
  out.innov_products = 2 * (hi - lo - max_lag);
  out.innov_samples = 2 * (hi - lo);
}

}  // namespace

Ensemble run_baseband_ensemble(const ModelParams& p, const EnsembleConfig& cfg,
                               const BasebandOptions& opt) {
  if (cfg.n_segments == 0) throw std::invalid_argument("n_segments must be > 0");
  const DerivedRates rates = derive_rates(p);
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  if (n < 16) throw std::invalid_argument("segment too short");

  const double v0 = cfg.v0 > 0.0 ? cfg.v0 : rates.v_bath;
  const double vE0 = cfg.vE_final > 0.0 ? cfg.vE_final : rates.v_bath;

  // Steady-state window for the pooled accumulators.
  const double t_lo = steady_state_time(rates, v0);
  const double t_hi = cfg.duration - steady_state_time(rates, vE0);
  if (!(t_hi > t_lo)) throw std::invalid_argument("segment too short to reach steady state");
  const auto k_lo = static_cast<std::size_t>(std::ceil(t_lo / cfg.dt));
  const auto k_hi = std::min(n, static_cast<std::size_t>(std::floor(t_hi / cfg.dt)));

  std::vector<SegmentResult> results(cfg.n_segments);
  parallel_for(cfg.n_segments, cfg.threads, [&](std::size_t seg) {
    const TruthTrajectory truth = simulate_truth(p, cfg.dt, n, cfg.seed, seg);
    const MeasurementRecord rec = measure(truth, p, cfg.seed, seg);
    SegmentResult& r = results[seg];
    r.pred = predict(rec, rates, v0);
    r.retro = retrodict(rec, rates, vE0);
    for (std::size_t k = k_lo; k < k_hi; ++k) {
      const double ex = truth.x[k] - r.pred.mean_x[k];
      const double ey = truth.y[k] - r.pred.mean_y[k];
      const double bx = truth.x[k] - r.retro.mean_x[k];
      const double by = truth.y[k] - r.retro.mean_y[k];
      r.sum_sq_fwd += ex * ex + ey * ey;
      r.sum_sq_bwd += bx * bx + by * by;
    }
    r.te_count = 2 * (k_hi - k_lo);
    if (opt.collect_innovations) {
      const Innovations nu = innovations(rec, r.pred, rates);
      accumulate_innovations(nu, k_lo, k_hi, opt.innovation_max_lag, r);
    }
  });

  // Deterministic reduction in segment order.
  Ensemble out;
  out.dt = cfg.dt;
  out.steady_lo = static_cast<double>(k_lo) * cfg.dt;
  out.steady_hi = static_cast<double>(k_hi) * cfg.dt;
  out.pred.reserve(cfg.n_segments);
  out.retro.reserve(cfg.n_segments);
  if (opt.collect_innovations) out.innov.lag_sums.assign(opt.innovation_max_lag + 1, 0.0);
  for (SegmentResult& r : results) {
    out.truth_err.sum_sq_fwd += r.sum_sq_fwd;
    out.truth_err.sum_sq_bwd += r.sum_sq_bwd;
    out.truth_err.count += r.te_count;
    if (opt.collect_innovations) {
      for (std::size_t lag = 0; lag < out.innov.lag_sums.size(); ++lag)
        out.innov.lag_sums[lag] += r.innov_lag_sums[lag];
      out.innov.n_products += r.innov_products;
      out.innov.sum_sq += r.innov_sum_sq;
      out.innov.n_samples += r.innov_samples;
    }
    out.pred.push_back(std::move(r.pred));
    out.retro.push_back(std::move(r.retro));
  }
  return out;
}

Ensemble run_carrier_ensemble(const ModelParams& p, const EnsembleConfig& cfg,
                              const CarrierOptions& opt) {
  if (cfg.n_segments == 0) throw std::invalid_argument("n_segments must be > 0");
  const DerivedRates rates = derive_rates(p);
  const auto n_truth = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  const double fs = opt.fs_mult * rad_to_hz(p.omega_m);

  const double v0 = cfg.v0 > 0.0 ? cfg.v0 : rates.v_bath;
  const double vE0 = cfg.vE_final > 0.0 ? cfg.vE_final : rates.v_bath;

  std::vector<SegmentResult> results(cfg.n_segments);
  parallel_for(cfg.n_segments, cfg.threads, [&](std::size_t seg) {
    const TruthTrajectory truth = simulate_truth(p, cfg.dt, n_truth, cfg.seed, seg);
    const CarrierRecord carrier = synthesize_carrier(truth, p, fs, cfg.seed, seg);
    const MeasurementRecord rec = demodulate(carrier, p.omega_m, opt.filter, opt.decim);
    results[seg].pred = predict(rec, rates, v0);
    results[seg].retro = retrodict(rec, rates, vE0);
  });

  Ensemble out;
  out.dt = results.empty() ? cfg.dt : results.front().pred.dt;
  out.steady_lo = steady_state_time(rates, v0);
  out.steady_hi = cfg.duration - steady_state_time(rates, vE0);
  out.pred.reserve(cfg.n_segments);
  out.retro.reserve(cfg.n_segments);
  for (SegmentResult& r : results) {
    out.pred.push_back(std::move(r.pred));
    out.retro.push_back(std::move(r.retro));
  }
  return out;
}

}  // namespace qtrack
