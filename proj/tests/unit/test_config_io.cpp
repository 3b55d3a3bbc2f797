#include <gtest/gtest.h>

#include <cstdint>
#include <string>

#include "heterodyn/config_io.hpp"
#include "heterodyn/error.hpp"
#include "test_util.hpp"

namespace heterodyn {
namespace {

void expect_same(const ModelSpec& a, const ModelSpec& b) {
  EXPECT_EQ(a.map_kind, b.map_kind);
  EXPECT_EQ(a.map.gamma0, b.map.gamma0);
  EXPECT_EQ(a.map.omega, b.map.omega);
  EXPECT_EQ(a.map.c, b.map.c);
  EXPECT_EQ(a.map.sigma_eps_bar, b.map.sigma_eps_bar);
  EXPECT_EQ(a.map_peak, b.map_peak);
  EXPECT_EQ(a.map_base, b.map_base);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.upsilon, b.upsilon);
  EXPECT_EQ(a.sigma.kind, b.sigma.kind);
  EXPECT_EQ(a.sigma.intercept, b.sigma.intercept);
  EXPECT_EQ(a.sigma.slope, b.sigma.slope);
  EXPECT_EQ(a.s.kind, b.s.kind);
  EXPECT_EQ(a.s.intercept, b.s.intercept);
  EXPECT_EQ(a.s.slope, b.s.slope);
  EXPECT_EQ(a.psi, b.psi);
  EXPECT_EQ(a.epsilon, b.epsilon);
  EXPECT_EQ(a.alpha, b.alpha);
}

TEST(ConfigIo, ParsesReferenceFile) {
  const ModelSpec s = testing::shipped_spec("reference.cfg");
  EXPECT_EQ(s.map_kind, MapKind::finance);
  EXPECT_EQ(s.map.gamma0, 15.969);
  EXPECT_EQ(s.map.sigma_eps_bar, 2.7e-5);
  EXPECT_EQ(s.a, 1.6);
  EXPECT_EQ(s.sigma.kind, ProfileKind::constant);
  EXPECT_EQ(s.sigma.intercept, 0.02);
  EXPECT_EQ(s.psi, PsiKind::uniform);
  ASSERT_TRUE(s.alpha.has_value());
  EXPECT_EQ(*s.alpha, 1.64);
}

TEST(ConfigIo, RoundTripsEveryShippedConfig) {
  for (const char* name : {"reference.cfg", "filter.cfg", "tent.cfg", "modulation_s05.cfg", "modulation_s1.cfg",
                           "modulation_affine.cfg"}) {
    const ModelSpec s = testing::shipped_spec(name);
    const std::string text = serialize_model_spec(s);
    const ModelSpec back = parse_model_spec_string(text);
    expect_same(s, back);
    EXPECT_EQ(serialize_model_spec(back), text) << name;
    EXPECT_EQ(config_hash(back), config_hash(s)) << name;
  }
}

TEST(ConfigIo, RoundTripsAwkwardNumbers) {
  ModelSpec s;
  s.map.omega = 0.1 + 0.2;
  s.a = 1.0 / 3.0;
  s.s = Profile::affine(1e-300, -2.5e-7);
  s.psi = PsiKind::triangular;
  s.map_kind = MapKind::logistic;
  expect_same(s, parse_model_spec_string(serialize_model_spec(s)));
}

TEST(ConfigIo, HashIsFnv1aOfCanonicalText) {
  const ModelSpec s = testing::shipped_spec("reference.cfg");
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize_model_spec(s)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  EXPECT_EQ(config_hash(s), h);
  EXPECT_EQ(hash_hex(0x1234abcdull), "000000001234abcd");
}

TEST(ConfigIo, HashIgnoresCommentsAndOrder) {
  const ModelSpec a = parse_model_spec_string("a = 1.5\nepsilon = 0.1\n");
  const ModelSpec b = parse_model_spec_string("# note\nepsilon=0.1   # trailing\n\n  a =1.5\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  ModelSpec c = a;
  c.a = 1.5000000000000002;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(ConfigIo, MissingKeysKeepDefaults) {
  expect_same(parse_model_spec_string(""), ModelSpec{});
}

TEST(ConfigIo, RejectsMalformedInput) {
  const char* bad[] = {
      "bogus = 1\n",
      "a = 1\na = 2\n",
      "a = one\n",
      "a = nan\n",
      "a = 1.5x\n",
      "a\n",
      "map_kind = henon\n",
      "psi_kind = gaussian\n",
      "sigma_kind = quadratic\n",
      "sigma_kind = affine\nsigma_intercept = 0.01\n",
      "sigma_kind = const\nsigma_slope = 0.1\n",
      "s_kind = affine\ns_const = 0.01\ns_intercept = 0.01\ns_slope = 0\n",
  };
  for (const char* text : bad) EXPECT_THROW(parse_model_spec_string(text), ConfigError) << text;
}

TEST(ConfigIo, MissingFileIsConfigError) {
  EXPECT_THROW(load_model_spec("/nonexistent/heterodyn.cfg"), ConfigError);
}

TEST(ConfigIo, AffineProfiles) {
  const ModelSpec s = parse_model_spec_string("s_kind = affine\ns_intercept = 0.01\ns_slope = 0.02\n");
  EXPECT_EQ(s.s.kind, ProfileKind::affine);
  EXPECT_DOUBLE_EQ(s.s(0.5), 0.02);
}

}  // namespace
}  // namespace heterodyn
