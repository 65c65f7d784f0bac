#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "qtrack/riccati.hpp"
#include "test_params.hpp"

using namespace qtrack;

namespace {

std::vector<double> uniform_grid(double t_max, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k)
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(n - 1);
  return t;
}

}  // namespace

TEST_CASE("closed form at the endpoints") {
  const DerivedRates r = derive_rates(reference_params());
  CHECK(v_analytic(r, r.v_bath, 0.0) == r.v_bath);
  CHECK(v_analytic(r, r.v_steady, 0.0) == r.v_steady);
  CHECK(v_analytic(r, r.v_steady, 1e-3) == doctest::Approx(r.v_steady).epsilon(1e-14));
  CHECK(v_analytic(r, r.v_bath, 1.0) == doctest::Approx(r.v_steady).epsilon(1e-12));
  // 100 us into the collapse the variance is within 1% of steady
  const double v100 = v_analytic(r, r.v_bath, 100e-6);
  CHECK(v100 == doctest::Approx(0.6120834637112351).epsilon(1e-10));
  CHECK(std::abs(v100 / r.v_steady - 1.0) < 0.01);
}

TEST_CASE("thermal-initial-condition form matches the general solution") {
  // V(t) = V + (2V + g)/(e^{2 alpha t} (1 + g/V)^2 - 1), g = gm/(4 gmeas),
  // valid for v0 = v_bath only.
  const DerivedRates r = derive_rates(reference_params());
  const double g = r.gamma_m / (4.0 * r.gamma_meas);
  for (double t : {1e-6, 1e-5, 5e-5, 1e-4, 5e-4, 2e-3}) {
    const double denom =
        std::exp(2.0 * r.alpha * t) * std::pow(1.0 + g / r.v_steady, 2.0) - 1.0;
    const double thermal = r.v_steady + (2.0 * r.v_steady + g) / denom;
    CHECK(v_analytic(r, r.v_bath, t) == doctest::Approx(thermal).epsilon(1e-12));
  }
}

TEST_CASE("backward variance and its fixed point") {
  const DerivedRates r = derive_rates(reference_params());
  CHECK(v_e_backward(r, r.v_e_steady, 0.0) == r.v_e_steady);
  CHECK(v_e_backward(r, r.v_e_steady, 1e-3) ==
        doctest::Approx(r.v_e_steady).epsilon(1e-14));
  CHECK(v_e_backward(r, r.v_bath, 2e-3) == doctest::Approx(r.v_e_steady).epsilon(1e-12));
  CHECK(v_e_backward(r, r.v_bath, 2e-3) == doctest::Approx(0.626).epsilon(1e-3));
  CHECK(r.v_e_steady - r.v_steady == doctest::Approx(0.0173).epsilon(2e-3));
}

TEST_CASE("ode oracle matches the closed form") {
  const DerivedRates r = derive_rates(reference_params());
  const double t_max = 50.0 / r.gamma_meas;
  const auto grid = uniform_grid(t_max, 600);

  SUBCASE("forward from the bath variance") {
    const VarianceCurve curve = v_ode_oracle(r, r.v_bath, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(curve.v[k] ==
            doctest::Approx(v_analytic(r, r.v_bath, grid[k])).epsilon(1e-6));
    }
  }
  SUBCASE("forward from a hot state") {
    const VarianceCurve curve = v_ode_oracle(r, 10.0 * r.v_bath, grid);
    CHECK(curve.v.back() == doctest::Approx(r.v_steady).epsilon(1e-6));
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(curve.v[k] ==
            doctest::Approx(v_analytic(r, 10.0 * r.v_bath, grid[k])).epsilon(1e-6));
  }
  SUBCASE("backward direction") {
    const VarianceCurve curve = v_ode_oracle(r, r.v_bath, grid, Direction::backward);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(curve.v[k] ==
            doctest::Approx(v_e_backward(r, r.v_bath, grid[k])).epsilon(1e-6));
  }
}

TEST_CASE("ode oracle without measurement relaxes exponentially") {
  ModelParams p = reference_params();
  p.gamma_meas = 1e-9 * p.gamma_m;
  const DerivedRates r = derive_rates(p);
  const auto grid = uniform_grid(3.0 / r.gamma_m, 400);
  const double v0 = 0.5;
  const VarianceCurve curve = v_ode_oracle(r, v0, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double expected =
        r.v_bath + (v0 - r.v_bath) * std::exp(-r.gamma_m * grid[k]);
    CHECK(curve.v[k] == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("oracle equivalence over random parameter sets") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ModelParams p;
    p.omega_m = hz_to_rad(1e6);
    p.gamma_m = hz_to_rad(5.0 + 300.0 * u(gen));
    p.n_th = 4.0 * u(gen);
    p.gamma_qba = hz_to_rad(200.0 + 4000.0 * u(gen));
    p.eta_det = 0.1 + 0.9 * u(gen);
    p.gamma_meas = p.eta_det * p.gamma_qba;
    const DerivedRates r = derive_rates(p);

    const double t_max = 50.0 / r.gamma_meas;
    const auto grid = uniform_grid(t_max, 160);
    const double v0 = r.v_bath * (0.2 + 3.0 * u(gen)) + 0.5;
    const VarianceCurve curve = v_ode_oracle(r, v0, grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double ref = v_analytic(r, v0, grid[k]);
      worst = std::max(worst, std::abs(curve.v[k] - ref) / ref);
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("time-reversal structure of the two equations") {
  // The backward equation is the forward one with the damping sign flipped;
  // integrating both with the same oracle and comparing fixed points.
  const DerivedRates r = derive_rates(reference_params());
  const auto grid = uniform_grid(2e-3, 200);
  const VarianceCurve fwd = v_ode_oracle(r, r.v_bath, grid, Direction::forward);
  const VarianceCurve bwd = v_ode_oracle(r, r.v_bath, grid, Direction::backward);
  CHECK(fwd.v.back() == doctest::Approx(r.v_steady).epsilon(1e-9));
  CHECK(bwd.v.back() == doctest::Approx(r.v_e_steady).epsilon(1e-9));
  // both relax at the same rate 2 alpha: compare normalized residuals
  const std::size_t k = 40;
  const double res_f = (fwd.v[k] - r.v_steady) / (r.v_bath - r.v_steady);
  const double res_b = (bwd.v[k] - r.v_e_steady) / (r.v_bath - r.v_e_steady);
  CHECK(res_f == doctest::Approx(res_b).epsilon(0.02));
}

TEST_CASE("schedules agree with the closed forms") {
  const DerivedRates r = derive_rates(reference_params());
  const double dt = 1e-6;
  const std::size_t n = 512;
  const auto fwd = forward_schedule(r, r.v_bath, n, dt);
  const auto bwd = backward_schedule(r, r.v_bath, n, dt);
  for (std::size_t k = 0; k < n; k += 37) {
    CHECK(fwd[k] == v_analytic(r, r.v_bath, static_cast<double>(k) * dt));
    CHECK(bwd[k] ==
          v_e_backward(r, r.v_bath, static_cast<double>(n - 1 - k) * dt));
  }

  // gain schedule: step averages sit between endpoint values and converge to
  // the pointwise schedule in the steady state
  const auto gain = forward_gain_schedule(r, r.v_bath, n, dt);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double lo = std::min(fwd[k], fwd[k + 1]);
    const double hi = std::max(fwd[k], fwd[k + 1]);
    CHECK(gain[k] >= lo - 1e-12);
    CHECK(gain[k] <= hi + 1e-12);
  }
  CHECK(gain[n - 2] == doctest::Approx(fwd[n - 2]).epsilon(1e-6));
}

TEST_CASE("curves are positive and monotone toward the fixed point") {
  const DerivedRates r = derive_rates(reference_params());
  const auto grid = uniform_grid(2e-3, 400);
  const VarianceCurve hot = v_ode_oracle(r, r.v_bath, grid);
  for (std::size_t k = 1; k < hot.v.size(); ++k) {
    CHECK(hot.v[k] > 0.0);
    CHECK(hot.v[k] <= hot.v[k - 1]);
  }
  const VarianceCurve cold = v_ode_oracle(r, 0.5, grid);
  for (std::size_t k = 1; k < cold.v.size(); ++k) CHECK(cold.v[k] >= cold.v[k - 1]);
  const VarianceCurve bwd = v_ode_oracle(r, r.v_bath, grid, Direction::backward);
  CHECK(bwd.v.back() == doctest::Approx(r.v_e_steady).epsilon(1e-9));
}

TEST_CASE("domain checks") {
  const DerivedRates r = derive_rates(reference_params());
  CHECK_THROWS_AS(v_analytic(r, 0.4, 1e-4), std::domain_error);
  CHECK_THROWS_AS(v_e_backward(r, 0.2, 1e-4), std::domain_error);
  CHECK_THROWS_AS(v_analytic(r, r.v_bath, -1.0), std::domain_error);
  const std::vector<double> bad_grid = {0.0, 1.0};  // hugely over the step bound
  CHECK_THROWS_AS(v_ode_oracle(r, r.v_bath, bad_grid), std::invalid_argument);
}

TEST_CASE("steady state time estimate") {
  const DerivedRates r = derive_rates(reference_params());
  const double ts = steady_state_time(r, r.v_bath);
  CHECK(ts > 0.0);
  CHECK(std::abs(v_analytic(r, r.v_bath, ts) - r.v_steady) <=
        doctest::Approx(1e-3 * r.v_steady).epsilon(0.05));
  CHECK(steady_state_time(r, r.v_steady) == 0.0);
}
