#include "qtrack/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace qtrack {

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance budget.
double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

// Integrates (1/pi) Int_0^W f plus the analytic 1/w^2 tail (coefficient
// tail_c = lim w^2 f(w)); integrands here are the even parts of two-sided
// spectra, so this equals (1/2pi) Int_{-inf}^{inf}.
double spectral_integral(const std::function<double(double)>& f,
                         std::span<const double> breakpoints, double tail_c,
                         int refine = 1) {
  double total = 0.0;
  const double panel_tol = 1e-9 / refine;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double a = breakpoints[k];
    const double b = breakpoints[k + 1];
    if (!(b > a)) continue;
    const double h = (b - a) / refine;
    for (int j = 0; j < refine; ++j)
      total += adaptive_simpson(f, a + j * h, a + (j + 1) * h, panel_tol);
  }
  const double w_max = breakpoints.back();
  total += tail_c / w_max;
  constexpr double pi = 0.5 * kTwoPi;
  return total / pi;
}

}  // namespace

SpectralModel::SpectralModel(const DerivedRates& rates, std::optional<DemodFilterSpec> filter)
    : rates_(rates), filter_(std::move(filter)) {
  if (filter_) filter_->validate();
}

double SpectralModel::s_xx(double w) const {
  const double hw = 0.5 * rates_.gamma_m;
  return rates_.v_bath * rates_.gamma_m / (hw * hw + w * w);
}

double SpectralModel::s_ii(double w) const {
  return 1.0 + 4.0 * rates_.gamma_meas * s_xx(w);
}

double SpectralModel::d_mag2(double w) const {
  return filter_ ? filter_->mag2_analog(w) : 1.0;
}

double SpectralModel::k_mag2(double w) const {
  const double num = 4.0 * rates_.gamma_meas * rates_.v_steady * rates_.v_steady;
  return num / (rates_.alpha * rates_.alpha + w * w);
}

double SpectralModel::kbar_mag2(double w) const {
  const double num = 4.0 * rates_.gamma_meas * rates_.v_e_steady * rates_.v_e_steady;
  return num / (rates_.alpha * rates_.alpha + w * w);
}

double SpectralModel::cross_re(double w) const {
  // K[-w] Kbar[w] = 4 gmeas V V_E / (alpha + i w)^2; real part is even in w.
  const double num = 4.0 * rates_.gamma_meas * rates_.v_steady * rates_.v_e_steady;
  const double a2 = rates_.alpha * rates_.alpha;
  const double denom = (a2 + w * w) * (a2 + w * w);
  return num * (a2 - w * w) / denom;
}

namespace {

std::vector<double> make_breakpoints(const DerivedRates& r,
                                     const std::optional<DemodFilterSpec>& filter,
                                     bool with_filter) {
  const double gm = r.gamma_m;
  const double al = r.alpha;
  std::vector<double> pts = {0.0,      gm / 8.0, gm / 2.0, 2.0 * gm, 8.0 * gm,
                             al / 4.0, al,       4.0 * al, 16.0 * al, 64.0 * al,
                             256.0 * al, 1024.0 * al, 4096.0 * al};
  if (with_filter && filter) {
    const double wc = hz_to_rad(filter->cutoff_hz);
    for (double m : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 6.0}) pts.push_back(m * wc);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double SpectralModel::sxx_sum_rule() const {
  const auto pts = make_breakpoints(rates_, filter_, false);
  // S_xx tail ~ v_bath gm / w^2
  return spectral_integral([&](double w) { return s_xx(w); }, pts,
                           rates_.v_bath * rates_.gamma_m);
}

TableS1 SpectralModel::integrate(bool with_filter, int refine) const {
  if (with_filter && !filter_)
    throw std::invalid_argument("spectral model has no demodulation filter configured");
  const auto pts = make_breakpoints(rates_, filter_, with_filter);

  auto dsq = [&](double w) { return with_filter ? d_mag2(w) : 1.0; };
  // 1/w^2 tail coefficients of the integrands (S_II -> 1, |D|^2 kills the
  // tail when the filter is on).
  const double g4 = 4.0 * rates_.gamma_meas;
  const double tail_pred = with_filter ? 0.0 : g4 * rates_.v_steady * rates_.v_steady;
  const double tail_retro = with_filter ? 0.0 : g4 * rates_.v_e_steady * rates_.v_e_steady;
  const double tail_cross = with_filter ? 0.0 : -g4 * rates_.v_steady * rates_.v_e_steady;

  TableS1 out;
  out.pred_var = spectral_integral([&](double w) { return k_mag2(w) * s_ii(w) * dsq(w); },
                                   pts, tail_pred, refine);
  out.retro_var = spectral_integral(
      [&](double w) { return kbar_mag2(w) * s_ii(w) * dsq(w); }, pts, tail_retro, refine);
  out.cross = spectral_integral([&](double w) { return cross_re(w) * s_ii(w) * dsq(w); },
                                pts, tail_cross, refine);
  out.sigma2 = out.pred_var + out.retro_var - 2.0 * out.cross;
  return out;
}

TableS1 table_s1(const SpectralModel& model, bool with_filter) {
  const TableS1 coarse = model.integrate(with_filter, 1);
  const TableS1 fine = model.integrate(with_filter, 2);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  if (rel(coarse.pred_var, fine.pred_var) > 1e-3 ||
      rel(coarse.retro_var, fine.retro_var) > 1e-3 ||
      rel(coarse.sigma2, fine.sigma2) > 1e-3)
    throw std::runtime_error("resolution error: spectral quadrature did not converge");
  return fine;
}

double filter_correction(const SpectralModel& model) {
  const TableS1 without = model.integrate(false);
  const TableS1 with = model.integrate(true);
  return without.sigma2 / with.sigma2;
}

void write_table_s1_csv(const TableS1& without_filter,
                        const std::optional<TableS1>& with_filter,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(12);
  out << "statistic,without_filter";
  if (with_filter) out << ",with_filter,difference_percent";
  out << '\n';
  auto row = [&](const char* name, double base, double filt) {
    out << name << ',' << base;
    if (with_filter) out << ',' << filt << ',' << 100.0 * (1.0 - filt / base);
    out << '\n';
  };
  const TableS1 w = with_filter.value_or(TableS1{});
  row("pred_var", without_filter.pred_var, w.pred_var);
  row("retro_var", without_filter.retro_var, w.retro_var);
  row("cross", without_filter.cross, w.cross);
  row("sigma2", without_filter.sigma2, w.sigma2);
}

}  // namespace qtrack
