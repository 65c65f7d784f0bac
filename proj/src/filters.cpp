#include "qtrack/filters.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qtrack {

namespace {

void check_record(const MeasurementRecord& record, const DerivedRates& p) {
  if (record.size() < 2 || record.dt <= 0.0)
    throw std::invalid_argument("invalid measurement record");
  if (record.i_x.size() != record.i_y.size())
    throw std::invalid_argument("record channels differ in length");
  if (record.params_hash != 0 && p.params_hash != 0 &&
      record.params_hash != p.params_hash)
    throw std::invalid_argument(
        "parameter mismatch: record was generated under different model parameters");
  if (record.dt * p.alpha >= 0.12)
    throw std::invalid_argument("step-size error: dt * alpha must be < 0.12");
}

}  // namespace

GaussianState StateTrajectory::at(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("trajectory index out of range");
  return {mean_x[k], mean_y[k], var(k), kind, time(k)};
}

std::size_t StateTrajectory::index_of(double t) const {
  const double pos = (t - t0) / dt;
  const auto k = static_cast<long long>(std::llround(pos));
  if (k < 0 || static_cast<std::size_t>(k) >= size())
    throw std::out_of_range("time outside trajectory span");
  return static_cast<std::size_t>(k);
}

StateTrajectory predict(const MeasurementRecord& record, const DerivedRates& p,
                        double v0) {
  check_record(record, p);
  if (v0 <= 0.0) v0 = p.v_bath;
  const std::size_t n = record.size();
  const double dt = record.dt;
  const double c = std::sqrt(4.0 * p.gamma_meas);

  const std::vector<double> gain_v = forward_gain_schedule(p, v0, n, dt);

  StateTrajectory traj;
  traj.dt = dt;
  traj.kind = StateKind::predicted;
  traj.variance = std::make_shared<const std::vector<double>>(forward_schedule(p, v0, n, dt));
  traj.mean_x.assign(n, 0.0);
  traj.mean_y.assign(n, 0.0);

  double rx = 0.0, ry = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double gain = c * gain_v[k] * dt;
    const double leak = 1.0 - 0.5 * p.gamma_m * dt - gain * c;
    rx = leak * rx + gain * record.i_x[k];
    ry = leak * ry + gain * record.i_y[k];
    traj.mean_x[k + 1] = rx;
    traj.mean_y[k + 1] = ry;
  }
  return traj;
}

StateTrajectory retrodict(const MeasurementRecord& record, const DerivedRates& p,
                          double vE_final) {
  check_record(record, p);
  if (vE_final <= 0.0) vE_final = p.v_bath;
  const std::size_t n = record.size();
  const double dt = record.dt;
  const double c = std::sqrt(4.0 * p.gamma_meas);

  const std::vector<double> gain_v = backward_gain_schedule(p, vE_final, n, dt);

  StateTrajectory traj;
  traj.dt = dt;
  traj.kind = StateKind::retrodicted;
  traj.variance =
      std::make_shared<const std::vector<double>>(backward_schedule(p, vE_final, n, dt));
  traj.mean_x.assign(n, 0.0);
  traj.mean_y.assign(n, 0.0);

  double rx = 0.0, ry = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    // step from t_{k+1} to t_k consumes record sample k
    const double gain = c * gain_v[k] * dt;
    const double leak = 1.0 + 0.5 * p.gamma_m * dt - gain * c;
    rx = leak * rx + gain * record.i_x[k];
    ry = leak * ry + gain * record.i_y[k];
    traj.mean_x[k] = rx;
    traj.mean_y[k] = ry;
  }
  return traj;
}

StateTrajectory predict_unconditioned(const StateTrajectory& traj, const DerivedRates& p,
                                      double t_star) {
  if (traj.kind != StateKind::predicted)
    throw std::invalid_argument("predict_unconditioned requires a predicted trajectory");
  const std::size_t ks = traj.index_of(t_star);  // throws on range error

  StateTrajectory out = traj;
  out.uncond_from = ks + 1;

  auto var = std::vector<double>(*traj.variance);
  const double v_star = var[ks];
  for (std::size_t k = ks + 1; k < traj.size(); ++k) {
    const double dt_rel = static_cast<double>(k - ks) * traj.dt;
    const double decay = std::exp(-0.5 * p.gamma_m * dt_rel);
    out.mean_x[k] = traj.mean_x[ks] * decay;
    out.mean_y[k] = traj.mean_y[ks] * decay;
    // measurement off: linear relaxation toward the bath variance
    var[k] = p.v_bath + (v_star - p.v_bath) * std::exp(-p.gamma_m * dt_rel);
  }
  out.variance = std::make_shared<const std::vector<double>>(std::move(var));
  return out;
}

StateTrajectory steady_kernel_filter(const MeasurementRecord& record,
                                     const DerivedRates& p, Direction direction) {
  check_record(record, p);
  const std::size_t n = record.size();
  const double dt = record.dt;
  const double c = std::sqrt(4.0 * p.gamma_meas);

  // Discrete kernel with per-step ratio matching the steady recursion; the
  // truncation keeps the neglected geometric tail below 1e-12.
  const double ratio = (direction == Direction::forward) ? 1.0 - p.alpha * dt
                                                         : 1.0 - p.lambda * dt;
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("step-size error: kernel ratio outside (0, 1)");
  const auto taps =
      static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(ratio)));
  if (n < taps + 16)
    throw std::invalid_argument("record too short for steady-state kernel transients");

  const double v = (direction == Direction::forward) ? p.v_steady : p.v_e_steady;
  std::vector<double> kernel(taps);
  double wgt = c * v * dt;
  for (std::size_t m = 0; m < taps; ++m) {
    kernel[m] = wgt;
    wgt *= ratio;
  }

  StateTrajectory traj;
  traj.dt = dt;
  traj.kind =
      (direction == Direction::forward) ? StateKind::predicted : StateKind::retrodicted;
  traj.variance = std::make_shared<const std::vector<double>>(std::vector<double>(n, v));
  traj.mean_x.assign(n, 0.0);
  traj.mean_y.assign(n, 0.0);

  if (direction == Direction::forward) {
    // r_k = sum_{m>=1} kernel[m-1] i_{k-m}
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t mmax = std::min(taps, k);
      double ax = 0.0, ay = 0.0;
      for (std::size_t m = 1; m <= mmax; ++m) {
        ax += kernel[m - 1] * record.i_x[k - m];
        ay += kernel[m - 1] * record.i_y[k - m];
      }
      traj.mean_x[k] = ax;
      traj.mean_y[k] = ay;
    }
  } else {
    // r_k = sum_{m>=0} kernel[m] i_{k+m}
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t mmax = std::min(taps, n - k);
      double ax = 0.0, ay = 0.0;
      for (std::size_t m = 0; m < mmax; ++m) {
        ax += kernel[m] * record.i_x[k + m];
        ay += kernel[m] * record.i_y[k + m];
      }
      traj.mean_x[k] = ax;
      traj.mean_y[k] = ay;
    }
  }
  return traj;
}

Innovations innovations(const MeasurementRecord& record, const StateTrajectory& pred,
                        const DerivedRates& p) {
  if (pred.size() != record.size())
    throw std::invalid_argument("record and trajectory lengths differ");
  const double c = std::sqrt(4.0 * p.gamma_meas);
  Innovations out;
  out.dt = record.dt;
  out.x.resize(record.size());
  out.y.resize(record.size());
  for (std::size_t k = 0; k < record.size(); ++k) {
    out.x[k] = record.i_x[k] * record.dt - c * pred.mean_x[k] * record.dt;
    out.y[k] = record.i_y[k] * record.dt - c * pred.mean_y[k] * record.dt;
  }
  return out;
}

void write_trajectory_csv(const StateTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t_s,r_x,r_y,v,conditioned\n";
  out.precision(17);
  for (std::size_t k = 0; k < traj.size(); ++k)
    out << traj.time(k) << ',' << traj.mean_x[k] << ',' << traj.mean_y[k] << ','
        << traj.var(k) << ',' << (traj.conditioned(k) ? 1 : 0) << '\n';
}

void write_trajectory(const StateTrajectory& traj, std::uint64_t seed,
                      std::uint64_t params_hash, const std::string& path) {
  Container c;
  c.kind = PayloadKind::trajectory;
  c.dt = traj.dt;
  c.seed = seed;
  c.params_hash = params_hash;
  std::vector<double> cond(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) cond[k] = traj.conditioned(k) ? 1.0 : 0.0;
  c.channels = {traj.mean_x, traj.mean_y, *traj.variance, std::move(cond)};
  write_container(c, path);
}

}  // namespace qtrack
