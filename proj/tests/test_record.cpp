#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "qtrack/record.hpp"

using namespace qtrack;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qtrack_test_rec_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

MeasurementRecord sample_record() {
  MeasurementRecord r;
  r.dt = 1e-6;
  r.seed = 99;
  r.params_hash = 0xdeadbeefcafef00dull;
  for (int k = 0; k < 257; ++k) {
    r.i_x.push_back(0.25 * k - 3.0);
    r.i_y.push_back(-0.5 * k + 1.0);
  }
  return r;
}

}  // namespace

TEST_CASE("record round trip preserves every field and sample") {
  TempDir tmp;
  const auto path = (tmp.path / "r.qtr").string();
  const MeasurementRecord r = sample_record();
  write_record(r, path);
  const MeasurementRecord back = read_record(path);
  CHECK(back.dt == r.dt);
  CHECK(back.seed == r.seed);
  CHECK(back.params_hash == r.params_hash);
  REQUIRE(back.size() == r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    CHECK(back.i_x[k] == r.i_x[k]);
    CHECK(back.i_y[k] == r.i_y[k]);
  }
}

TEST_CASE("carrier round trip") {
  TempDir tmp;
  const auto path = (tmp.path / "c.qtr").string();
  CarrierRecord c;
  c.dt = 1.0 / 18.208e6;
  c.seed = 5;
  c.params_hash = 17;
  for (int k = 0; k < 1000; ++k) c.samples.push_back(std::sin(0.01 * k));
  write_carrier(c, path);
  const CarrierRecord back = read_carrier(path);
  CHECK(back.dt == c.dt);
  REQUIRE(back.size() == c.size());
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(back.samples[k] == c.samples[k]);
}

TEST_CASE("kind mismatch is rejected") {
  TempDir tmp;
  const auto path = (tmp.path / "c.qtr").string();
  CarrierRecord c;
  c.dt = 1e-7;
  c.samples.assign(64, 1.0);
  write_carrier(c, path);
  CHECK_THROWS_AS(read_record(path), std::runtime_error);
}

TEST_CASE("corrupt and truncated files are rejected") {
  TempDir tmp;
  const auto bogus = (tmp.path / "bogus.qtr").string();
  {
    std::ofstream out(bogus, std::ios::binary);
    out << "definitely not a container";
  }
  CHECK_THROWS_AS(read_container(bogus), std::runtime_error);

  const auto trunc = (tmp.path / "trunc.qtr").string();
  write_record(sample_record(), trunc);
  fs::resize_file(trunc, fs::file_size(trunc) / 2);
  CHECK_THROWS_AS(read_record(trunc), std::runtime_error);

  CHECK_THROWS_AS(read_container((tmp.path / "missing.qtr").string()), std::runtime_error);
}

TEST_CASE("csv export carries a header and all samples") {
  TempDir tmp;
  const auto path = (tmp.path / "r.csv").string();
  const MeasurementRecord r = sample_record();
  write_record_csv(r, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t_s,i_x,i_y");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == r.size());
}
