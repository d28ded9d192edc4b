#include "retune/io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace retune {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "retune_io_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Rtnf, RoundTripIsBitwise) {
  Rng rng(1);
  Vec v = testing::random_vec(rng, 24);
  v[3] = -0.0;
  v[5] = std::numeric_limits<double>::denorm_min();
  std::stringstream ss;
  write_rtnf(ss, {2, 3, 4}, v);
  const auto [dims, back] = read_rtnf(ss);
  EXPECT_EQ(dims, (std::vector<std::uint32_t>{2, 3, 4}));
  ASSERT_EQ(back.size(), v.size());
  EXPECT_EQ(std::memcmp(back.data(), v.data(), sizeof(double) * 24), 0);
}

TEST(Rtnf, HeaderLayout) {
  std::stringstream ss;
  write_rtnf(ss, {2}, Vec{{1.0, 2.0}});
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 16);
  EXPECT_EQ(bytes.substr(0, 4), "RTNF");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
}

TEST(Rtnf, RejectsBadInput) {
  std::stringstream ss;
  write_rtnf(ss, {1}, Vec{{1.0}});
  std::string bytes = ss.str();
  bytes[3] = 'X';
  std::stringstream bad(bytes);
  EXPECT_THROW(read_rtnf(bad), FormatError);
  std::stringstream truncated(ss.str().substr(0, 14));
  EXPECT_THROW(read_rtnf(truncated), FormatError);
  std::stringstream out;
  EXPECT_THROW(write_rtnf(out, {3}, Vec{{1.0}}), std::invalid_argument);
}

TEST(Rtnf, SignalFileRoundTrip) {
  Rng rng(2);
  const Signal x = testing::random_signal(rng, Shape{3, 5, 2});
  const auto path = temp_path("x.rtnf").string();
  write_signal(path, x);
  const Signal y = read_signal(path);
  EXPECT_TRUE(y.shape() == x.shape());
  EXPECT_EQ(y.data(), x.data());
}

TEST(Pnm, ColourQuantizationError) {
  Rng rng(3);
  Vec d(3 * 4 * 6);
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = rng.uniform();
  const Signal x(Shape{4, 6, 3}, d);
  const auto path = temp_path("x.ppm").string();
  write_pnm(path, x);
  const Signal y = read_pnm(path);
  EXPECT_TRUE(y.shape() == x.shape());
  EXPECT_LE((y.data() - x.data()).cwiseAbs().maxCoeff(), 0.5 / 255 + 1e-12);
}

TEST(Pnm, GrayAndClamping) {
  Vec d{{-0.5, 0.0, 0.5, 1.0, 1.5, 0.25}};
  const auto path = temp_path("x.pgm").string();
  write_pnm(path, Signal(Shape{2, 3, 1}, d));
  const Signal y = read_pnm(path);
  EXPECT_EQ(y.shape().channels, 1);
  EXPECT_EQ(y.data()[0], 0.0);
  EXPECT_EQ(y.data()[4], 1.0);
  EXPECT_NEAR(y.data()[2], 128.0 / 255, 1e-15);
  EXPECT_THROW(write_pnm(path, Signal(Shape{2, 2, 2}, Vec::Zero(8))), std::invalid_argument);
}

TEST(Pnm, RejectsUnknownMagic) {
  const auto path = temp_path("bad.ppm").string();
  std::ofstream(path) << "P3\n1 1\n255\n0 0 0\n";
  EXPECT_THROW(read_pnm(path), FormatError);
}

TEST(Csv, FormatsRowsAndNumbers) {
  CsvTable t({"a", "b"});
  t.add_row({"1", format_double(0.1)});
  t.add_row({format_double(-2.5), format_double(std::nan(""))});
  EXPECT_EQ(t.str(), "a,b\n1,0.10000000000000001\n-2.5,nan\n");
  EXPECT_THROW(t.add_row({"x"}), std::invalid_argument);
  EXPECT_EQ(std::stod(format_double(1.0 / 3)), 1.0 / 3);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

}  // namespace
}  // namespace retune
