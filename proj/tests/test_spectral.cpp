#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "qtrack/spectral.hpp"
#include "test_params.hpp"

using namespace qtrack;

TEST_CASE("sum rule fixes the quadrature spectrum normalization") {
  const DerivedRates r = derive_rates(reference_params());
  const SpectralModel model(r);
  CHECK(model.sxx_sum_rule() == doctest::Approx(r.v_bath).epsilon(1e-6));
}

TEST_CASE("hermitian symmetry of all spectra") {
  const DerivedRates r = derive_rates(reference_params());
  const SpectralModel model(r);
  for (double w : {13.0, 817.0, 2.9e4, 3.8e5, 1.1e7}) {
    CHECK(model.s_ii(-w) == model.s_ii(w));
    CHECK(model.k_mag2(-w) == model.k_mag2(w));
    CHECK(model.kbar_mag2(-w) == model.kbar_mag2(w));
    CHECK(model.cross_re(-w) == model.cross_re(w));
    CHECK(model.d_mag2(-w) == model.d_mag2(w));
  }
}

TEST_CASE("unfiltered integrals match the closed forms") {
  const DerivedRates r = derive_rates(reference_params());
  const SpectralModel model(r);
  const TableS1 t = table_s1(model, false);
  const double scale = 4.0 * r.gamma_meas / r.gamma_m;
  CHECK(t.pred_var ==
        doctest::Approx(scale * r.v_steady * r.v_steady).epsilon(1e-4));
  CHECK(t.retro_var ==
        doctest::Approx(scale * r.v_e_steady * r.v_e_steady).epsilon(1e-4));
  CHECK(t.cross == doctest::Approx(scale * r.v_steady * r.v_steady).epsilon(1e-4));
  CHECK(t.sigma2 == doctest::Approx(r.v_steady + r.v_e_steady).epsilon(1e-3));
}

TEST_CASE("reference statistics with and without the demodulation filter") {
  const DerivedRates r = derive_rates(reference_params());
  const SpectralModel model(r, DemodFilterSpec{});

  const TableS1 base = table_s1(model, false);
  CHECK(base.pred_var == doctest::Approx(21.21).epsilon(0.02));
  CHECK(base.retro_var == doctest::Approx(22.44).epsilon(0.02));
  CHECK(base.cross == doctest::Approx(21.21).epsilon(0.02));
  CHECK(base.sigma2 == doctest::Approx(1.24).epsilon(0.02));

  const TableS1 filt = table_s1(model, true);
  CHECK(filt.sigma2 == doctest::Approx(1.17).epsilon(0.017));
  const double difference = 1.0 - filt.sigma2 / base.sigma2;
  CHECK(difference > 0.046);
  CHECK(difference < 0.066);

  // the first three rows barely move (sub-percent) and in a fixed direction
  CHECK(std::abs(filt.pred_var / base.pred_var - 1.0) < 0.01);
  CHECK(std::abs(filt.retro_var / base.retro_var - 1.0) < 0.01);
  CHECK(std::abs(filt.cross / base.cross - 1.0) < 0.01);
  CHECK(filt.pred_var < base.pred_var);
  CHECK(filt.cross > base.cross);
}

TEST_CASE("filter correction factor") {
  const DerivedRates r = derive_rates(reference_params());
  SUBCASE("default filter gives the ~5.5% correction") {
    const SpectralModel model(r, DemodFilterSpec{});
    const double corr = filter_correction(model);
    CHECK(corr == doctest::Approx(1.056).epsilon(0.01));
  }
  SUBCASE("no filter means exactly 1") {
    DemodFilterSpec identity;
    identity.cutoff_hz = 1e15;  // far beyond every feature
    const SpectralModel model(r, identity);
    CHECK(filter_correction(model) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("wideband limit converges toward 1") {
    DemodFilterSpec wide;
    wide.cutoff_hz = 100.0 * rad_to_hz(r.alpha);
    const SpectralModel wide_model(r, wide);
    const double corr100 = filter_correction(wide_model);
    CHECK(corr100 == doctest::Approx(1.0064).epsilon(2e-3));
    CHECK(std::abs(corr100 - 1.0) < 0.01);

    DemodFilterSpec wider;
    wider.cutoff_hz = 1000.0 * rad_to_hz(r.alpha);
    const SpectralModel wider_model(r, wider);
    CHECK(std::abs(filter_correction(wider_model) - 1.0) < 1e-3);
  }
}

TEST_CASE("quadrature is converged: panel refinement moves nothing") {
  const DerivedRates r = derive_rates(reference_params());
  const SpectralModel model(r, DemodFilterSpec{});
  for (bool with_filter : {false, true}) {
    const TableS1 a = model.integrate(with_filter, 1);
    const TableS1 b = model.integrate(with_filter, 2);
    CHECK(std::abs(a.pred_var / b.pred_var - 1.0) < 1e-3);
    CHECK(std::abs(a.retro_var / b.retro_var - 1.0) < 1e-3);
    CHECK(std::abs(a.sigma2 / b.sigma2 - 1.0) < 1e-3);
  }
}

TEST_CASE("with-filter request requires a configured filter") {
  const DerivedRates r = derive_rates(reference_params());
  const SpectralModel bare(r, std::nullopt);
  CHECK_THROWS_AS(bare.integrate(true), std::invalid_argument);
}
