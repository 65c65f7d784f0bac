#include "qtrack/demod.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "qtrack/detail/phase.hpp"
#include "qtrack/model.hpp"

namespace qtrack {

void DemodFilterSpec::validate() const {
  if (order < 1 || order > 12) throw std::invalid_argument("filter order must be in [1, 12]");
  if (stages < 1 || stages > 8) throw std::invalid_argument("filter stages must be in [1, 8]");
  if (!(cutoff_hz > 0.0)) throw std::invalid_argument("filter cutoff must be > 0");
}

double DemodFilterSpec::mag2_analog(double w) const {
  const double wc = hz_to_rad(cutoff_hz);
  const double ratio = std::abs(w) / wc;
  const double one_stage = 1.0 / (1.0 + std::pow(ratio, 2.0 * order));
  double m = 1.0;
  for (int s = 0; s < stages; ++s) m *= one_stage;
  if (zero_phase) m *= m;  // forward-backward doubles the magnitude rolloff
  return m;
}

std::vector<SosSection> butterworth_sos(int order, double cutoff_hz, double fs_hz) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < 0.5 * fs_hz))
    throw std::invalid_argument("cutoff must lie in (0, fs/2)");

  // Prewarped analog cutoff, bilinear transform of the Butterworth poles.
  const double warped = 2.0 * fs_hz * std::tan(kTwoPi * cutoff_hz / (2.0 * fs_hz));
  const double fs2 = 2.0 * fs_hz;

  std::vector<SosSection> sections;
  sections.reserve((order + 1) / 2);

  const double pi = 0.5 * kTwoPi;
  const int pairs = order / 2;
  for (int k = 0; k < pairs; ++k) {
    const double theta = pi / 2.0 + pi * (2.0 * k + 1.0) / (2.0 * order);
    const std::complex<double> pole_s = warped * std::polar(1.0, theta);
    const std::complex<double> pole_z = (fs2 + pole_s) / (fs2 - pole_s);
    const double re = pole_z.real();
    const double mag2 = std::norm(pole_z);
    const double a1 = -2.0 * re;
    const double a2 = mag2;
    const double g = (1.0 + a1 + a2) / 4.0;  // unit DC gain, zeros at z = -1
    sections.push_back({g, 2.0 * g, g, a1, a2});
  }
  if (order % 2 == 1) {
    const double pole_s = -warped;
    const double pole_z = (fs2 + pole_s) / (fs2 - pole_s);
    const double a1 = -pole_z;
    const double g = (1.0 + a1) / 2.0;
    sections.push_back({g, g, 0.0, a1, 0.0});
  }
  return sections;
}

SosCascade::SosCascade(std::vector<SosSection> sections)
    : sections_(std::move(sections)),
      z1_(sections_.size(), 0.0),
      z2_(sections_.size(), 0.0) {}

double SosCascade::step(double x) {
  for (std::size_t s = 0; s < sections_.size(); ++s) {
    const SosSection& c = sections_[s];
    const double y = c.b0 * x + z1_[s];
    z1_[s] = c.b1 * x - c.a1 * y + z2_[s];
    z2_[s] = c.b2 * x - c.a2 * y;
    x = y;
  }
  return x;
}

void SosCascade::process(std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size()) throw std::invalid_argument("size mismatch");
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = step(in[k]);
}

void SosCascade::reset() {
  std::fill(z1_.begin(), z1_.end(), 0.0);
  std::fill(z2_.begin(), z2_.end(), 0.0);
}

std::complex<double> SosCascade::response(double freq_hz, double fs_hz) const {
  const double w = kTwoPi * freq_hz / fs_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const SosSection& c : sections_)
    h *= (c.b0 + c.b1 * z1 + c.b2 * z2) / (1.0 + c.a1 * z1 + c.a2 * z2);
  return h;
}

bool SosCascade::stable() const {
  for (const SosSection& c : sections_) {
    if (std::abs(c.a2) >= 1.0) return false;
    if (std::abs(c.a1) >= 1.0 + c.a2) return false;
  }
  return true;
}

SosCascade make_demod_filter(const DemodFilterSpec& spec, double fs_hz) {
  spec.validate();
  const auto one = butterworth_sos(spec.order, spec.cutoff_hz, fs_hz);
  std::vector<SosSection> all;
  all.reserve(one.size() * spec.stages);
  for (int s = 0; s < spec.stages; ++s) all.insert(all.end(), one.begin(), one.end());
  SosCascade cascade(std::move(all));
  if (!cascade.stable())
    throw std::invalid_argument("instability error: designed filter has poles outside the unit circle");
  return cascade;
}

namespace {

void filter_in_place(SosCascade& f, std::vector<double>& v, bool zero_phase) {
  for (double& s : v) s = f.step(s);
  if (zero_phase) {
    f.reset();
    std::reverse(v.begin(), v.end());
    for (double& s : v) s = f.step(s);
    std::reverse(v.begin(), v.end());
  }
}

}  // namespace

MeasurementRecord demodulate(const CarrierRecord& I, double omega_m,
                             const DemodFilterSpec& spec, int decim) {
  spec.validate();
  const double fs = I.fs();
  if (!(rad_to_hz(omega_m) + spec.cutoff_hz < 0.5 * fs))
    throw std::invalid_argument("aliasing error: fs/2 must exceed omega_m/2pi + cutoff");
  if (I.size() < 16) throw std::invalid_argument("carrier record too short");

  if (decim <= 0) {
    decim = 1;
    while (decim < (1 << 20) && fs / (2.0 * decim) >= 8.0 * spec.cutoff_hz) decim *= 2;
  }
  const double dt_bb = static_cast<double>(decim) / fs;

  const detail::CarrierPhase phase(omega_m, I.dt);
  std::vector<double> mx(I.size()), my(I.size());
  for (std::size_t j = 0; j < I.size(); ++j) {
    double cw, sw;
    phase.at(j, cw, sw);
    mx[j] = 2.0 * I.samples[j] * cw;
    my[j] = 2.0 * I.samples[j] * sw;
  }

  SosCascade fx = make_demod_filter(spec, fs);
  SosCascade fy = make_demod_filter(spec, fs);
  filter_in_place(fx, mx, spec.zero_phase);
  filter_in_place(fy, my, spec.zero_phase);

  // Settling transient: five time constants of the cascaded low-pass.
  const double tau = static_cast<double>(spec.order * spec.stages) / hz_to_rad(spec.cutoff_hz);
  const auto settle_bb = static_cast<std::size_t>(std::ceil(5.0 * tau / dt_bb));
  const std::size_t n_bb = I.size() / static_cast<std::size_t>(decim);
  const std::size_t tail = spec.zero_phase ? settle_bb : 0;
  if (n_bb <= settle_bb + tail + 16)
    throw std::invalid_argument("carrier record too short for filter settling");

  const double norm = 1.0 / std::sqrt(2.0);  // unit shot-noise background
  MeasurementRecord rec;
  rec.dt = dt_bb;
  rec.seed = I.seed;
  rec.params_hash = I.params_hash;
  rec.i_x.reserve(n_bb - settle_bb - tail);
  rec.i_y.reserve(n_bb - settle_bb - tail);
  for (std::size_t m = settle_bb; m < n_bb - tail; ++m) {
    const std::size_t j = m * static_cast<std::size_t>(decim);
    rec.i_x.push_back(norm * mx[j]);
    rec.i_y.push_back(norm * my[j]);
  }
  return rec;
}

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Psd estimate_psd(std::span<const double> x, double dt, std::size_t segment_len,
                 double overlap) {
  if (segment_len < 8) throw std::invalid_argument("segment_len must be >= 8");
  if (segment_len > x.size())
    throw std::invalid_argument("length error: segment_len exceeds record length");
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw std::invalid_argument("overlap must lie in [0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");

  const std::size_t L = segment_len;
  const std::size_t hop =
      std::max<std::size_t>(1, L - static_cast<std::size_t>(overlap * static_cast<double>(L)));
  const std::size_t n_bins = L / 2 + 1;

  std::vector<double> window(L);
  double wsum2 = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    window[j] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(j) / static_cast<double>(L)));
    wsum2 += window[j] * window[j];
  }

  double* buf = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    buf = fftw_alloc_real(L);
    spec = fftw_alloc_complex(n_bins);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(L), buf, spec, FFTW_ESTIMATE);
  }

  Psd psd;
  psd.value.assign(n_bins, 0.0);
  std::size_t n_avg = 0;
  for (std::size_t start = 0; start + L <= x.size(); start += hop) {
    for (std::size_t j = 0; j < L; ++j) buf[j] = x[start + j] * window[j];
    fftw_execute(plan);
    for (std::size_t k = 0; k < n_bins; ++k)
      psd.value[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    ++n_avg;
  }
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
    fftw_free(spec);
  }
  if (n_avg == 0) throw std::invalid_argument("record shorter than one segment");

  // Two-sided density, shot-noise units: white noise of variance 1/dt -> 1.
  const double scale = dt / (wsum2 * static_cast<double>(n_avg));
  for (double& v : psd.value) v *= scale;

  psd.n_avg = n_avg;
  psd.df = 1.0 / (static_cast<double>(L) * dt);
  psd.freq_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) psd.freq_hz[k] = static_cast<double>(k) * psd.df;
  return psd;
}

double Psd::total_power() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < value.size(); ++k) {
    const bool edge = (k == 0) || (k + 1 == value.size());
    sum += value[k] * (edge ? 1.0 : 2.0);
  }
  return sum * df;
}

void write_psd_csv(const Psd& psd, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "freq_hz,psd\n";
  out.precision(17);
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k)
    out << psd.freq_hz[k] << ',' << psd.value[k] << '\n';
}

}  // namespace qtrack
