#include "cvas/config.hpp"

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "cvas/error.hpp"

namespace cvas {
namespace {

TEST(ConfigTest, ParsesKeyValueLines) {
  const ConfigFile c = ConfigFile::parse(
      "# comment\n"
      "divergence = fisher-rao\n"
      "  n-p=500   # trailing\n"
      "\n"
      "rho-neg = 2.5\n");
  EXPECT_EQ(c.get("divergence"), "fisher-rao");
  EXPECT_EQ(c.get("n-p"), "500");
  EXPECT_EQ(c.get("rho-neg"), "2.5");
  EXPECT_FALSE(c.get("seed").has_value());
  EXPECT_EQ(c.entries().size(), 3u);
}

TEST(ConfigTest, RejectsMalformedLines) {
  EXPECT_THROW(ConfigFile::parse("no equals sign\n"), Error);
  EXPECT_THROW(ConfigFile::parse("= value\n"), Error);
}

TEST(ConfigTest, BadNumbers) {
  const ConfigFile c = ConfigFile::parse("k = ten\nr = 1.5x\n");
  EXPECT_THROW(resolve_int(std::nullopt, c, "k", 1), Error);
  EXPECT_THROW(resolve_double(std::nullopt, c, "r", 1.0), Error);
  EXPECT_THROW(resolve_int(std::string("2.5"), c, "missing", 1), Error);
}

TEST(ConfigTest, FlagBeatsConfigBeatsDefault) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> value(-1000, 1000);
  for (int t = 0; t < 500; ++t) {
    const bool has_flag = coin(rng), has_file = coin(rng);
    const int flag = value(rng), file = value(rng), fallback = value(rng);
    const ConfigFile c =
        ConfigFile::parse(has_file ? "key = " + std::to_string(file) + "\n" : std::string());
    const std::optional<std::string> f =
        has_flag ? std::optional<std::string>(std::to_string(flag)) : std::nullopt;
    const int expected = has_flag ? flag : has_file ? file : fallback;
    EXPECT_EQ(resolve_int(f, c, "key", fallback), expected);
    EXPECT_EQ(resolve_double(f, c, "key", fallback), static_cast<double>(expected));
    EXPECT_EQ(resolve_string(f, c, "key", std::to_string(fallback)), std::to_string(expected));
  }
}

}  // namespace
}  // namespace cvas
