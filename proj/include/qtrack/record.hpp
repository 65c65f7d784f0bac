#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qtrack {

/// True oscillator quadratures on a uniform grid (zero-point units).
struct TruthTrajectory {
  double dt = 0.0;
  std::vector<double> x;  // X quadrature
  std::vector<double> y;  // Y quadrature
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;

  std::size_t size() const { return x.size(); }
};

/// Two-channel quadrature measurement record, shot-noise normalized so that
/// a pure-noise channel has per-sample variance 1/dt (PSD background 1).
struct MeasurementRecord {
  double dt = 0.0;
  std::vector<double> i_x;
  std::vector<double> i_y;
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;

  std::size_t size() const { return i_x.size(); }
};

/// Single-channel carrier-rate photocurrent, same noise normalization.
struct CarrierRecord {
  double dt = 0.0;  // 1/fs
  std::vector<double> samples;
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;

  std::size_t size() const { return samples.size(); }
  double fs() const { return 1.0 / dt; }
};

enum class PayloadKind : std::uint32_t {
  record = 0,
  truth = 1,
  trajectory = 2,
  carrier = 3,
};

/// On-disk container: little-endian header followed by channel-interleaved
/// float64 samples.
struct Container {
  PayloadKind kind = PayloadKind::record;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;
  std::vector<std::vector<double>> channels;

  std::size_t samples_per_channel() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

void write_container(const Container& c, const std::string& path);
Container read_container(const std::string& path);

void write_record(const MeasurementRecord& r, const std::string& path);
MeasurementRecord read_record(const std::string& path);

void write_carrier(const CarrierRecord& r, const std::string& path);
CarrierRecord read_carrier(const std::string& path);

void write_record_csv(const MeasurementRecord& r, const std::string& path);

}  // namespace qtrack
