#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qtrack/record.hpp"

namespace qtrack {

/// Low-pass used for IQ demodulation: `stages` cascaded Butterworth sections
/// of the given order, each with the same one-sided cutoff.
struct DemodFilterSpec {
  int order = 7;
  int stages = 2;
  double cutoff_hz = 60e3;
  bool zero_phase = false;  // forward-backward filtering instead of causal

  void validate() const;

  /// Squared magnitude of the analog prototype at angular frequency w:
  /// [1/(1 + (w/wc)^(2 order))]^stages. This is the baseband-equivalent
  /// |D|^2 used by the spectral module.
  double mag2_analog(double w) const;
};

struct SosSection {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator (a0 == 1)
};

/// Bilinear-transform Butterworth design, unit DC gain per section.
std::vector<SosSection> butterworth_sos(int order, double cutoff_hz, double fs_hz);

class SosCascade {
 public:
  SosCascade() = default;
  explicit SosCascade(std::vector<SosSection> sections);

  double step(double x);
  void process(std::span<const double> in, std::span<double> out);
  void reset();

  std::complex<double> response(double freq_hz, double fs_hz) const;
  bool stable() const;
  const std::vector<SosSection>& sections() const { return sections_; }

 private:
  std::vector<SosSection> sections_;
  std::vector<double> z1_, z2_;  // transposed direct-form II state
};

/// Full demodulation filter (stages x order) at sampling rate fs.
SosCascade make_demod_filter(const DemodFilterSpec& spec, double fs_hz);

/// IQ demodulation of a carrier record at omega_m:
///   i_X = LP[2 I cos(omega_m t)] / sqrt(2),  i_Y = LP[2 I sin(...)] / sqrt(2)
/// decimated to baseband. The 1/sqrt(2) sets the shot-noise background of
/// the output channels to 1 (a pure tone at omega_m of unit amplitude maps
/// to 1/sqrt(2)). The first five filter time constants are discarded as
/// settling transient. decim = 0 picks the largest power of two that keeps
/// the baseband rate >= 8x cutoff.
MeasurementRecord demodulate(const CarrierRecord& I, double omega_m,
                             const DemodFilterSpec& spec, int decim = 0);

/// Welch-style averaged periodogram. Values are shot-noise-normalized
/// two-sided densities on a one-sided frequency grid: white noise of
/// per-sample variance 1/dt gives background 1. Hann window.
struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> value;
  std::size_t n_avg = 0;
  double df = 0.0;

  /// 2 * sum(value) * df with DC/Nyquist counted once; equals the record
  /// variance up to window bias.
  double total_power() const;
};

Psd estimate_psd(std::span<const double> x, double dt, std::size_t segment_len,
                 double overlap = 0.5);

void write_psd_csv(const Psd& psd, const std::string& path);

}  // namespace qtrack
