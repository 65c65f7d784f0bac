#include "qtrack/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "qtrack/detail/phase.hpp"
#include "qtrack/rng.hpp"

namespace qtrack {

namespace {

// Step-size guard for the explicit schemes. The binding scale is the
// measurement rate; the damping rate only needs to be loosely resolved.
void check_step(const ModelParams& p, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (dt * p.gamma_meas >= 0.02)
    throw std::invalid_argument("step-size error: dt * gamma_meas must be < 0.02");
  if (dt * p.gamma_m >= 0.002)
    throw std::invalid_argument("step-size error: dt * gamma_m must be < 0.002");
}

}  // namespace

TruthTrajectory simulate_truth(const ModelParams& p, double dt, std::size_t n,
                               std::uint64_t seed, std::uint64_t segment) {
  check_step(p, dt);
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  p.validate();

  const double diffusion = p.gamma_m * (p.n_th + 0.5) + p.gamma_qba;
  const double v_bath = p.n_th + 0.5 + p.gamma_qba / p.gamma_m;
  const double decay = 1.0 - 0.5 * p.gamma_m * dt;
  const double noise = std::sqrt(diffusion * dt);
  const double sigma0 = std::sqrt(v_bath);

  TruthTrajectory out;
  out.dt = dt;
  out.seed = seed;
  out.params_hash = p.hash();
  out.x.resize(n);
  out.y.resize(n);

  NormalStream init(seed, segment, NoiseStream::init);
  out.x[0] = sigma0 * init.next();
  out.y[0] = sigma0 * init.next();

  NormalStream gx(seed, segment, NoiseStream::process_x);
  NormalStream gy(seed, segment, NoiseStream::process_y);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    out.x[k + 1] = decay * out.x[k] + noise * gx.next();
    out.y[k + 1] = decay * out.y[k] + noise * gy.next();
  }
  return out;
}

MeasurementRecord measure(const TruthTrajectory& truth, const ModelParams& p,
                          std::uint64_t seed, std::uint64_t segment) {
  if (truth.size() < 2 || truth.dt <= 0.0)
    throw std::invalid_argument("invalid truth trajectory");
  p.validate();

  const double c = std::sqrt(4.0 * p.gamma_meas);
  const double shot_sigma = 1.0 / std::sqrt(truth.dt);  // w_k/dt with Var[w_k] = dt

  MeasurementRecord rec;
  rec.dt = truth.dt;
  rec.seed = seed;
  rec.params_hash = p.hash();
  rec.i_x.resize(truth.size());
  rec.i_y.resize(truth.size());

  NormalStream sx(seed, segment, NoiseStream::shot_x);
  NormalStream sy(seed, segment, NoiseStream::shot_y);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    rec.i_x[k] = c * truth.x[k] + shot_sigma * sx.next();
    rec.i_y[k] = c * truth.y[k] + shot_sigma * sy.next();
  }
  return rec;
}

CarrierRecord synthesize_carrier(const TruthTrajectory& truth, const ModelParams& p,
                                 double fs, std::uint64_t seed, std::uint64_t segment) {
  if (truth.size() < 2 || truth.dt <= 0.0)
    throw std::invalid_argument("invalid truth trajectory");
  p.validate();
  if (!(fs > 8.0 * rad_to_hz(p.omega_m)))
    throw std::invalid_argument("sampling-rate error: fs must exceed 8 * omega_m/2pi");

  const double dt_c = 1.0 / fs;
  const auto n_c = static_cast<std::size_t>(truth.size() * truth.dt * fs);
  const double amp = std::sqrt(8.0 * p.gamma_meas);
  const double shot_sigma = std::sqrt(fs);
  const detail::CarrierPhase phase(p.omega_m, dt_c);

  CarrierRecord out;
  out.dt = dt_c;
  out.seed = seed;
  out.params_hash = p.hash();
  out.samples.resize(n_c);

  NormalStream shot(seed, segment, NoiseStream::carrier_shot);
  const double ratio = dt_c / truth.dt;
  for (std::size_t j = 0; j < n_c; ++j) {
    const auto k = std::min(static_cast<std::size_t>(static_cast<double>(j) * ratio),
                            truth.size() - 1);
    double cw, sw;
    phase.at(j, cw, sw);
    out.samples[j] = amp * (truth.x[k] * cw + truth.y[k] * sw) + shot_sigma * shot.next();
  }
  return out;
}

}  // namespace qtrack
