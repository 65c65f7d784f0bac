#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>

#include "qtrack/demod.hpp"
#include "qtrack/simulate.hpp"
#include "test_params.hpp"

using namespace qtrack;

TEST_CASE("reproducibility: identical inputs give identical trajectories") {
  const ModelParams p = reference_params();
  const TruthTrajectory a = simulate_truth(p, 1e-6, 2048, 42, 3);
  const TruthTrajectory b = simulate_truth(p, 1e-6, 2048, 42, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.x[k] == b.x[k]);
    CHECK(a.y[k] == b.y[k]);
  }
  const TruthTrajectory c = simulate_truth(p, 1e-6, 2048, 43, 3);
  CHECK(c.x[100] != a.x[100]);
}

TEST_CASE("stationary ensemble variance matches v_bath") {
  const ModelParams p = reference_params();
  const DerivedRates r = derive_rates(p);
  const std::size_t n = 1600;
  const std::size_t n_seg = 500;
  double sum2_x = 0.0, sum2_y = 0.0, cross = 0.0;
  std::size_t count = 0;
  for (std::size_t seg = 0; seg < n_seg; ++seg) {
    const TruthTrajectory t = simulate_truth(p, 1e-6, n, 1, seg);
    for (std::size_t k = 0; k < n; k += 200) {
      sum2_x += t.x[k] * t.x[k];
      sum2_y += t.y[k] * t.y[k];
      cross += t.x[k] * t.y[k];
      ++count;
    }
  }
  const double vx = sum2_x / static_cast<double>(count);
  const double vy = sum2_y / static_cast<double>(count);
  const double cxy = cross / static_cast<double>(count);
  CHECK(vx == doctest::Approx(r.v_bath).epsilon(0.10));
  CHECK(vy == doctest::Approx(r.v_bath).epsilon(0.10));
  CHECK(std::abs(cxy) < 0.1 * r.v_bath);
}

TEST_CASE("ground state without backaction or thermal noise") {
  ModelParams p = reference_params();
  p.n_th = 0.0;
  p.gamma_qba = 1e-6 * p.gamma_m;
  p.gamma_meas = 1e-7 * p.gamma_m;
  double sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t seg = 0; seg < 400; ++seg) {
    const TruthTrajectory t = simulate_truth(p, 1e-6, 512, 2, seg);
    sum2 += t.x[0] * t.x[0] + t.y[0] * t.y[0] + t.x[511] * t.x[511] + t.y[511] * t.y[511];
    count += 4;
  }
  CHECK(sum2 / static_cast<double>(count) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("autocorrelation decays at gamma_m/2") {
  // slower, weakly probed variant so a coarse step stays within the guard;
  // the truth autocorrelation itself involves only gamma_m
  ModelParams p = reference_params();
  p.gamma_m = hz_to_rad(30.0);
  p.gamma_meas = hz_to_rad(500.0);
  const double dt = 4e-6;
  const std::size_t n = 16384;
  // lag tau: <x(t) x(t+tau)> = v_bath exp(-gm tau / 2)
  double num = 0.0, den = 0.0;
  const std::size_t lag = 2000;  // 8 ms
  for (std::size_t seg = 0; seg < 60; ++seg) {
    const TruthTrajectory t = simulate_truth(p, dt, n, 3, seg);
    for (std::size_t k = 0; k + lag < n; k += 7) {
      num += t.x[k] * t.x[k + lag] + t.y[k] * t.y[k + lag];
      den += t.x[k] * t.x[k] + t.y[k] * t.y[k];
    }
  }
  const double measured = num / den;
  const double expected = std::exp(-0.5 * p.gamma_m * static_cast<double>(lag) * dt);
  CHECK(measured == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("pure-noise record is white with variance 1/dt") {
  ModelParams p = reference_params();
  p.gamma_meas = 1e-9 * p.gamma_m;  // effectively no measurement
  const double dt = 1e-6;
  const std::size_t n = 1 << 20;
  const TruthTrajectory t = simulate_truth(p, dt, 4, 9, 0);
  TruthTrajectory silent;
  silent.dt = dt;
  silent.seed = t.seed;
  silent.params_hash = t.params_hash;
  silent.x.assign(n, 0.0);
  silent.y.assign(n, 0.0);
  const MeasurementRecord rec = measure(silent, p, 9, 0);
  double s2 = 0.0;
  double lag1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) s2 += rec.i_x[k] * rec.i_x[k];
  for (std::size_t k = 0; k + 1 < n; ++k) lag1 += rec.i_x[k] * rec.i_x[k + 1];
  const double var = s2 / static_cast<double>(n);
  CHECK(var == doctest::Approx(1.0 / dt).epsilon(0.02));
  CHECK(std::abs(lag1 / s2) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("record PSD: Lorentzian peak area and background") {
  const ModelParams p = reference_params();
  const DerivedRates r = derive_rates(p);
  const double dt = 1e-6;
  const std::size_t n = 3200;
  // the line power estimate decorrelates only over ~2/gamma_m, so the sum
  // rule needs a couple of seconds of pooled record to settle
  std::vector<double> pooled;
  pooled.reserve(n * 600);
  for (std::size_t seg = 0; seg < 600; ++seg) {
    const TruthTrajectory t = simulate_truth(p, dt, n, 5, seg);
    const MeasurementRecord rec = measure(t, p, 5, seg);
    pooled.insert(pooled.end(), rec.i_x.begin(), rec.i_x.end());
  }
  const Psd psd = estimate_psd(pooled, dt, 4096, 0.5);

  // background well outside the peak (> 50 kHz offset)
  double bg = 0.0;
  std::size_t bg_count = 0;
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    if (psd.freq_hz[k] > 100e3 && psd.freq_hz[k] < 400e3) {
      bg += psd.value[k];
      ++bg_count;
    }
  }
  bg /= static_cast<double>(bg_count);
  CHECK(bg == doctest::Approx(1.0).epsilon(0.05));

  // sum rule: Int over the one-sided grid of (S - 1) df = 4 gmeas v_bath;
  // the peak sits at DC in baseband, so the edge bins carry weight 1
  double area = 0.0;
  for (std::size_t k = 0; k < psd.value.size(); ++k) {
    const bool edge = (k == 0) || (k + 1 == psd.value.size());
    area += (psd.value[k] - 1.0) * (edge ? 1.0 : 2.0);
  }
  area *= psd.df;
  CHECK(area == doctest::Approx(4.0 * r.gamma_meas * r.v_bath).epsilon(0.10));
}

TEST_CASE("step-size and argument guards") {
  const ModelParams p = reference_params();
  CHECK_THROWS_AS(simulate_truth(p, 2e-6, 128, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(simulate_truth(p, 1e-6, 1, 1, 0), std::invalid_argument);
  const TruthTrajectory t = simulate_truth(p, 1e-6, 128, 1, 0);
  CHECK_THROWS_AS(synthesize_carrier(t, p, 4.0 * rad_to_hz(p.omega_m), 1, 0),
                  std::invalid_argument);
}

TEST_CASE("carrier synthesis: PSD peak at omega_m over unit background") {
  const ModelParams p = reference_params();
  const double fs = 16.0 * rad_to_hz(p.omega_m);
  const double dt = 1e-6;
  std::vector<double> pooled;
  for (std::size_t seg = 0; seg < 6; ++seg) {
    const TruthTrajectory t = simulate_truth(p, dt, 3200, 21, seg);
    const CarrierRecord c = synthesize_carrier(t, p, fs, 21, seg);
    pooled.insert(pooled.end(), c.samples.begin(), c.samples.end());
  }
  const Psd psd = estimate_psd(pooled, 1.0 / fs, 1 << 14, 0.5);

  const double f_m = rad_to_hz(p.omega_m);
  double peak = 0.0, peak_f = 0.0, bg = 0.0;
  std::size_t bg_count = 0;
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    if (psd.value[k] > peak) {
      peak = psd.value[k];
      peak_f = psd.freq_hz[k];
    }
    if (std::abs(psd.freq_hz[k] - f_m) > 0.3 * f_m) {
      bg += psd.value[k];
      ++bg_count;
    }
  }
  CHECK(peak_f == doctest::Approx(f_m).epsilon(0.002));
  CHECK(peak > 50.0);
  CHECK(bg / static_cast<double>(bg_count) == doctest::Approx(1.0).epsilon(0.05));
}
