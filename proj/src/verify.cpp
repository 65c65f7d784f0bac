#include "qtrack/verify.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qtrack {

namespace {

struct Cov2 {
  double xx = 0.0, yy = 0.0, xy = 0.0;
  std::size_t n = 0;
};

// Unbiased 2x2 covariance of (vx[i], vy[i]) via a two-pass evaluation; the
// pass order is fixed so parallel producers cannot perturb the result.
Cov2 covariance(std::span<const double> vx, std::span<const double> vy) {
  const std::size_t n = vx.size();
  if (n < 2) throw std::invalid_argument("insufficient ensemble: need >= 2 realizations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += vx[i];
    my += vy[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  Cov2 c;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = vx[i] - mx;
    const double dy = vy[i] - my;
    c.xx += dx * dx;
    c.yy += dy * dy;
    c.xy += dx * dy;
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  c.xx *= norm;
  c.yy *= norm;
  c.xy *= norm;
  c.n = n;
  return c;
}

}  // namespace

VerificationReport relative_variance(std::span<const StateTrajectory> pred,
                                     std::span<const StateTrajectory> retro,
                                     double t0, const DerivedRates& rates,
                                     double correction_factor) {
  if (pred.size() != retro.size())
    throw std::invalid_argument("prediction and retrodiction ensembles differ in size");
  if (pred.size() < 100)
    throw std::invalid_argument("insufficient ensemble: need >= 100 realizations");
  if (!(correction_factor > 0.0))
    throw std::invalid_argument("correction factor must be positive");

  std::vector<double> dx(pred.size()), dy(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t kp = pred[i].index_of(t0);
    const std::size_t kr = retro[i].index_of(t0);
    dx[i] = pred[i].mean_x[kp] - retro[i].mean_x[kr];
    dy[i] = pred[i].mean_y[kp] - retro[i].mean_y[kr];
    if (i == 0) {
      const double vp = pred[i].var(kp);
      const double vr = retro[i].var(kr);
      if (std::abs(vp - rates.v_steady) > 1e-2 * rates.v_steady ||
          std::abs(vr - rates.v_e_steady) > 1e-2 * rates.v_e_steady)
        std::cerr << "warning: conditional variance not in steady state at t0\n";
    }
  }
  const Cov2 c = covariance(dx, dy);

  VerificationReport rep;
  rep.n_realizations = c.n;
  rep.t0 = t0;
  rep.sigma2_xx = c.xx;
  rep.sigma2_yy = c.yy;
  rep.sigma2_xy = c.xy;
  rep.sigma2_raw = 0.5 * (c.xx + c.yy);
  rep.correction_applied = correction_factor != 1.0;
  rep.correction_factor = correction_factor;
  rep.sigma2 = rep.sigma2_raw * correction_factor;
  rep.sigma2_stderr = rep.sigma2 / std::sqrt(static_cast<double>(c.n - 1));
  rep.v_impl = rep.sigma2 - rates.v_e_steady;
  rep.purity = 1.0 / (2.0 * rep.v_impl);
  rep.n_cond = rep.v_impl - 0.5;
  return rep;
}

double unconditional_variance(std::span<const StateTrajectory> retro, double t0) {
  if (retro.size() < 2)
    throw std::invalid_argument("insufficient ensemble: need >= 2 realizations");
  std::vector<double> rx(retro.size()), ry(retro.size());
  for (std::size_t i = 0; i < retro.size(); ++i) {
    const std::size_t k = retro[i].index_of(t0);
    rx[i] = retro[i].mean_x[k];
    ry[i] = retro[i].mean_y[k];
  }
  const Cov2 c = covariance(rx, ry);
  return 0.5 * (c.xx + c.yy);
}

namespace {

CollapseCurve curve_from_ensembles(std::span<const StateTrajectory> pred,
                                   std::span<const StateTrajectory> retro,
                                   std::span<const double> grid,
                                   const std::function<double(double)>& theory_fn) {
  CollapseCurve curve;
  curve.t0.assign(grid.begin(), grid.end());
  curve.sigma2.resize(grid.size());
  curve.stderr_.resize(grid.size());
  curve.theory.resize(grid.size());
  curve.uncond.resize(grid.size());
  std::vector<double> dx(pred.size()), dy(pred.size());
  std::vector<double> bx(pred.size()), by(pred.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const std::size_t kp = pred[i].index_of(grid[g]);
      const std::size_t kr = retro[i].index_of(grid[g]);
      dx[i] = pred[i].mean_x[kp] - retro[i].mean_x[kr];
      dy[i] = pred[i].mean_y[kp] - retro[i].mean_y[kr];
      bx[i] = retro[i].mean_x[kr];
      by[i] = retro[i].mean_y[kr];
    }
    const Cov2 d = covariance(dx, dy);
    const Cov2 b = covariance(bx, by);
    curve.sigma2[g] = 0.5 * (d.xx + d.yy);
    curve.stderr_[g] = curve.sigma2[g] / std::sqrt(static_cast<double>(d.n - 1));
    curve.uncond[g] = 0.5 * (b.xx + b.yy);
    curve.theory[g] = theory_fn(grid[g]);
  }
  return curve;
}

}  // namespace

CollapseCurve collapse_curve(const ModelParams& p, const EnsembleConfig& cfg,
                             std::span<const double> t0_grid) {
  if (t0_grid.empty()) throw std::invalid_argument("grid error: empty t0 grid");
  const DerivedRates rates = derive_rates(p);
  for (double t0 : t0_grid)
    if (!(t0 >= 0.0 && t0 <= cfg.duration - 0.5 * cfg.dt))
      throw std::invalid_argument("grid error: t0 outside segment span");

  const Ensemble ens = run_baseband_ensemble(p, cfg);
  const double v0 = cfg.v0 > 0.0 ? cfg.v0 : rates.v_bath;
  return curve_from_ensembles(ens.pred, ens.retro, t0_grid, [&](double t0) {
    return v_analytic(rates, v0, t0) + rates.v_e_steady;
  });
}

double decoherence_theory(const DerivedRates& r, double t_minus_tstar) {
  if (t_minus_tstar <= 0.0) return r.v_steady + r.v_e_steady;
  const double uncond = 4.0 * r.gamma_meas / r.gamma_m * r.v_steady * r.v_steady;
  return r.v_steady + r.v_e_steady +
         uncond * (1.0 - std::exp(-r.gamma_m * t_minus_tstar));
}

CollapseCurve decoherence_curve(const ModelParams& p, double t_star,
                                const EnsembleConfig& cfg,
                                std::span<const double> t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("grid error: empty t grid");
  const DerivedRates rates = derive_rates(p);
  if (!(t_star > 0.0 && t_star < cfg.duration))
    throw std::invalid_argument("grid error: t_star outside segment span");

  const double v0 = cfg.v0 > 0.0 ? cfg.v0 : rates.v_bath;
  if (t_star < steady_state_time(rates, v0))
    std::cerr << "warning: conditioning stops before the conditional variance "
                 "reaches steady state; the closed-form comparison assumes it has\n";

  Ensemble ens = run_baseband_ensemble(p, cfg);
  for (StateTrajectory& traj : ens.pred) traj = predict_unconditioned(traj, rates, t_star);
  return curve_from_ensembles(ens.pred, ens.retro, t_grid, [&](double t) {
    return decoherence_theory(rates, t - t_star);
  });
}

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["n_realizations"] = n_realizations;
  j["t0_s"] = t0;
  j["sigma2"] = sigma2;
  j["sigma2_raw"] = sigma2_raw;
  j["sigma2_xx"] = sigma2_xx;
  j["sigma2_yy"] = sigma2_yy;
  j["sigma2_xy"] = sigma2_xy;
  j["sigma2_stderr"] = sigma2_stderr;
  j["v_impl"] = v_impl;
  j["purity"] = purity;
  j["n_cond"] = n_cond;
  j["correction_applied"] = correction_applied;
  j["correction_factor"] = correction_factor;
  return j.dump(2) + "\n";
}

void write_curve_csv(const CollapseCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t0_s,sigma2,stderr,theory,uncond\n";
  out.precision(17);
  for (std::size_t k = 0; k < c.t0.size(); ++k)
    out << c.t0[k] << ',' << c.sigma2[k] << ',' << c.stderr_[k] << ',' << c.theory[k]
        << ',' << c.uncond[k] << '\n';
}

}  // namespace qtrack
