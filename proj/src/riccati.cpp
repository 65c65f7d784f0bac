#include "qtrack/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qtrack {

namespace {

void check_v0(double v0) {
  if (!(v0 >= 0.5))
    throw std::domain_error("initial variance must be >= 1/2 (quantum state)");
}

// Logistic-form solution shared by both directions: attracting root a,
// repelling root -b, relaxation rate 2*alpha.
inline double logistic(double a, double b, double two_alpha, double v0, double t) {
  if (t == 0.0) return v0;
  const double u = std::exp(-two_alpha * t) * (v0 - a) / (v0 + b);
  return a + (a + b) * u / (1.0 - u);
}

// Average of the logistic solution over [t, t+dt]:
//   (1/dt) Int V = a + (a+b)/(2 alpha dt) * log((1-u(t+dt))/(1-u(t)))
inline double logistic_step_average(double a, double b, double two_alpha, double v0,
                                    double t, double dt) {
  const double u0 = std::exp(-two_alpha * t) * (v0 - a) / (v0 + b);
  const double u1 = u0 * std::exp(-two_alpha * dt);
  return a + (a + b) / (two_alpha * dt) * std::log1p((u0 - u1) / (1.0 - u0));
}

}  // namespace

double v_analytic(const DerivedRates& p, double v0, double t) {
  check_v0(v0);
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  return logistic(p.v_steady, p.v_e_steady, 2.0 * p.alpha, v0, t);
}

double v_e_backward(const DerivedRates& p, double vE_final, double t_before_end) {
  check_v0(vE_final);
  if (!(t_before_end >= 0.0)) throw std::domain_error("t_before_end must be >= 0");
  return logistic(p.v_e_steady, p.v_steady, 2.0 * p.alpha, vE_final, t_before_end);
}

VarianceCurve v_ode_oracle(const DerivedRates& p, double v0,
                           std::span<const double> t_grid, Direction direction) {
  check_v0(v0);
  if (t_grid.size() < 2) throw std::invalid_argument("t_grid needs >= 2 points");
  const double grid_step = t_grid[1] - t_grid[0];
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (std::abs((t_grid[k] - t_grid[k - 1]) - grid_step) > 1e-9 * grid_step)
      throw std::invalid_argument("t_grid must be uniform");
  }
  // dV/dt = -gm V + gm(n+1/2) + gqba - 4 gmeas V^2   (forward)
  // dVE/ds = +gm VE + gm(n+1/2) + gqba - 4 gmeas VE^2 (backward, s = time before end)
  const double damping = (direction == Direction::forward) ? -p.gamma_m : p.gamma_m;
  auto rhs = [&](double v) {
    return damping * v + p.diffusion - 4.0 * p.gamma_meas * v * v;
  };
  // Solutions are monotone between the entry value and the attracting root,
  // so the stiffness bound 8 gmeas max(v) + gm evaluated there holds along
  // the whole interval. Substep size keeps h * stiffness <= 1e-3.
  const double attract = (direction == Direction::forward) ? p.v_steady : p.v_e_steady;

  VarianceCurve curve;
  curve.direction = direction;
  curve.t.assign(t_grid.begin(), t_grid.end());
  curve.v.resize(t_grid.size());
  double v = v0;
  curve.v[0] = v;
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double stiffness = 8.0 * p.gamma_meas * std::max(v, attract) + p.gamma_m;
    const double h_max = std::min(1e-3 / stiffness, grid_step);
    const auto substeps = static_cast<std::size_t>(std::ceil(grid_step / h_max));
    if (substeps > 50'000'000)
      throw std::invalid_argument(
          "step-size error: grid interval needs too many substeps; refine t_grid");
    const double h = grid_step / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double k1 = rhs(v);
      const double k2 = rhs(v + 0.5 * h * k1);
      const double k3 = rhs(v + 0.5 * h * k2);
      const double k4 = rhs(v + h * k3);
      v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    curve.v[k] = v;
  }
  return curve;
}

std::vector<double> forward_schedule(const DerivedRates& p, double v0, std::size_t n,
                                     double dt) {
  check_v0(v0);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = logistic(p.v_steady, p.v_e_steady, 2.0 * p.alpha, v0,
                      static_cast<double>(k) * dt);
  return out;
}

std::vector<double> backward_schedule(const DerivedRates& p, double vE_final,
                                      std::size_t n, double dt) {
  check_v0(vE_final);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = logistic(p.v_e_steady, p.v_steady, 2.0 * p.alpha, vE_final,
                      static_cast<double>(n - 1 - k) * dt);
  return out;
}

std::vector<double> forward_gain_schedule(const DerivedRates& p, double v0,
                                          std::size_t n, double dt) {
  check_v0(v0);
  if (n == 0) return {};
  std::vector<double> out(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
    out[k] = logistic_step_average(p.v_steady, p.v_e_steady, 2.0 * p.alpha, v0,
                                   static_cast<double>(k) * dt, dt);
  return out;
}

std::vector<double> backward_gain_schedule(const DerivedRates& p, double vE_final,
                                           std::size_t n, double dt) {
  check_v0(vE_final);
  if (n == 0) return {};
  // Element k averages V_E over [t_k, t_{k+1}], i.e. over
  // s in [n-2-k, n-1-k] steps before the final condition.
  std::vector<double> out(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k)
    out[k] = logistic_step_average(p.v_e_steady, p.v_steady, 2.0 * p.alpha, vE_final,
                                   static_cast<double>(n - 2 - k) * dt, dt);
  return out;
}

double steady_state_time(const DerivedRates& p, double v0, double tol) {
  check_v0(v0);
  const double u0 = std::abs((v0 - p.v_steady) / (v0 + p.v_e_steady));
  if (u0 == 0.0) return 0.0;
  // |V - Vs| ~ (Vs + VEs) u; solve u = tol*Vs/(Vs+VEs)
  const double target = tol * p.v_steady / (p.v_steady + p.v_e_steady);
  if (u0 <= target) return 0.0;
  return std::log(u0 / target) / (2.0 * p.alpha);
}

void write_csv(const VarianceCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t_s,v\n";
  out.precision(17);
  for (std::size_t k = 0; k < curve.t.size(); ++k)
    out << curve.t[k] << ',' << curve.v[k] << '\n';
}

}  // namespace qtrack
