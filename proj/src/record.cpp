#include "qtrack/record.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qtrack {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container IO assumes a little-endian host");

constexpr char kMagic[8] = {'Q', 'T', 'R', 'K', 'B', 'I', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

struct Header {
  char magic[8];
  std::uint32_t version;
  std::uint32_t kind;
  std::uint64_t n;
  std::uint32_t channels;
  std::uint32_t reserved;
  double dt;
  std::uint64_t seed;
  std::uint64_t params_hash;
};
static_assert(sizeof(Header) == 56);

}  // namespace

void write_container(const Container& c, const std::string& path) {
  if (c.channels.empty()) throw std::invalid_argument("container has no channels");
  const std::size_t n = c.channels.front().size();
  for (const auto& ch : c.channels)
    if (ch.size() != n) throw std::invalid_argument("container channels differ in length");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  Header h{};
  std::memcpy(h.magic, kMagic, sizeof(kMagic));
  h.version = kVersion;
  h.kind = static_cast<std::uint32_t>(c.kind);
  h.n = n;
  h.channels = static_cast<std::uint32_t>(c.channels.size());
  h.reserved = 0;
  h.dt = c.dt;
  h.seed = c.seed;
  h.params_hash = c.params_hash;
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));

  std::vector<double> row(c.channels.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t ch = 0; ch < c.channels.size(); ++ch) row[ch] = c.channels[ch][k];
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);

  Header h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::memcmp(h.magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a qtrack container: " + path);
  if (h.version != kVersion)
    throw std::runtime_error("unsupported container version in " + path);
  if (h.channels == 0 || h.channels > 16)
    throw std::runtime_error("corrupt container header in " + path);

  Container c;
  c.kind = static_cast<PayloadKind>(h.kind);
  c.dt = h.dt;
  c.seed = h.seed;
  c.params_hash = h.params_hash;
  c.channels.assign(h.channels, std::vector<double>(h.n));

  std::vector<double> row(h.channels);
  for (std::uint64_t k = 0; k < h.n; ++k) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated container: " + path);
    for (std::size_t ch = 0; ch < row.size(); ++ch) c.channels[ch][k] = row[ch];
  }
  return c;
}

void write_record(const MeasurementRecord& r, const std::string& path) {
  Container c;
  c.kind = PayloadKind::record;
  c.dt = r.dt;
  c.seed = r.seed;
  c.params_hash = r.params_hash;
  c.channels = {r.i_x, r.i_y};
  write_container(c, path);
}

MeasurementRecord read_record(const std::string& path) {
  Container c = read_container(path);
  if (c.kind != PayloadKind::record || c.channels.size() != 2)
    throw std::runtime_error("not a two-channel measurement record: " + path);
  MeasurementRecord r;
  r.dt = c.dt;
  r.seed = c.seed;
  r.params_hash = c.params_hash;
  r.i_x = std::move(c.channels[0]);
  r.i_y = std::move(c.channels[1]);
  return r;
}

void write_carrier(const CarrierRecord& r, const std::string& path) {
  Container c;
  c.kind = PayloadKind::carrier;
  c.dt = r.dt;
  c.seed = r.seed;
  c.params_hash = r.params_hash;
  c.channels = {r.samples};
  write_container(c, path);
}

CarrierRecord read_carrier(const std::string& path) {
  Container c = read_container(path);
  if (c.kind != PayloadKind::carrier || c.channels.size() != 1)
    throw std::runtime_error("not a carrier record: " + path);
  CarrierRecord r;
  r.dt = c.dt;
  r.seed = c.seed;
  r.params_hash = c.params_hash;
  r.samples = std::move(c.channels[0]);
  return r;
}

void write_record_csv(const MeasurementRecord& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t_s,i_x,i_y\n";
  out.precision(17);
  for (std::size_t k = 0; k < r.size(); ++k)
    out << static_cast<double>(k) * r.dt << ',' << r.i_x[k] << ',' << r.i_y[k] << '\n';
}

}  // namespace qtrack
