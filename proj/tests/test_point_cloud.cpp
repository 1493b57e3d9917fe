#include <gtest/gtest.h>

#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "msmf/point_cloud.hpp"
#include "msmf/rng.hpp"

namespace {

msmf::PointCloud random_cloud(std::size_t dim, std::size_t n, std::uint64_t seed) {
  msmf::PointCloud cloud(dim);
  msmf::CounterRng rng(seed);
  msmf::Vector p(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : p) v = rng.normal() * std::pow(10.0, rng.uniform(-12.0, 12.0));
    cloud.push_back(p);
  }
  return cloud;
}

TEST(PointCloud, RoundTripIsExact) {
  const auto cloud = random_cloud(3, 500, 11);
  std::stringstream ss;
  msmf::write_point_cloud(ss, cloud);
  const auto back = msmf::read_point_cloud(ss);
  EXPECT_EQ(back, cloud);
}

TEST(PointCloud, RoundTripThroughFile) {
  const auto cloud = random_cloud(4, 50, 12);
  const auto path = std::filesystem::temp_directory_path() / "msmf_point_cloud_roundtrip.txt";
  msmf::write_point_cloud(path, cloud);
  EXPECT_EQ(msmf::read_point_cloud(path), cloud);
  std::filesystem::remove(path);
}

TEST(PointCloud, HeaderFormat) {
  msmf::PointCloud cloud(2);
  cloud.push_back(msmf::Vector::Constant(2, 0.1));
  std::stringstream ss;
  msmf::write_point_cloud(ss, cloud);
  EXPECT_EQ(ss.str(), "# dim=2 count=1\n0.10000000000000001 0.10000000000000001\n");
}

TEST(PointCloud, PushBackRejectsWrongDimension) {
  msmf::PointCloud cloud(3);
  EXPECT_THROW(cloud.push_back(msmf::Vector::Zero(2)), msmf::DomainError);
}

TEST(PointCloud, PushBackRejectsNonFinite) {
  msmf::PointCloud cloud(2);
  msmf::Vector p(2);
  p << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cloud.push_back(p), msmf::DomainError);
}

TEST(PointCloud, ZeroDimensionRejected) { EXPECT_THROW(msmf::PointCloud(0), msmf::DomainError); }

void expect_parse_error(const std::string& text, const std::string& fragment) {
  std::stringstream ss(text);
  try {
    msmf::read_point_cloud(ss, msmf::Provenance::Noisy, "input.txt");
    FAIL() << "expected a parse error for: " << text;
  } catch (const msmf::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(PointCloud, ParseErrorsCarryLocation) {
  expect_parse_error("", "input.txt:1: missing header");
  expect_parse_error("dim=2 count=1\n1 2\n", "input.txt:1:");
  expect_parse_error("# dim=2 count=1\n1\n", "input.txt:2: expected 2 numbers");
  expect_parse_error("# dim=2 count=1\n1 nan\n", "non-finite");
  expect_parse_error("# dim=2 count=1\n1 2 3\n", "trailing characters");
  expect_parse_error("# dim=2 count=2\n1 2\n", "declares 2 points, found 1");
  expect_parse_error("# dim=2 count=1\n1 x\n", "input.txt:2:");
}

TEST(PointCloud, MissingFileNamesPath) {
  try {
    msmf::read_point_cloud(std::filesystem::path("/nonexistent/cloud.txt"));
    FAIL();
  } catch (const msmf::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/cloud.txt"), std::string::npos);
  }
}

TEST(PointCloud, BlankLinesAndCrlfAccepted) {
  std::stringstream ss("# dim=2 count=2\r\n1 2\r\n\n3 4\n");
  const auto cloud = msmf::read_point_cloud(ss);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[1][0], 3.0);
}

}  // namespace
