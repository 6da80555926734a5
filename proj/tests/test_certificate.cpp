#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "morse/certificate.hpp"

using namespace morse;
using namespace morse::certificate;

TEST(Certificate, Coefficients) {
  EXPECT_DOUBLE_EQ(k0_coeff({100, 100}), 500.0);
  EXPECT_DOUBLE_EQ(k0_coeff({1, 1}), 5.0);
  EXPECT_DOUBLE_EQ(k0_coeff({80, 0}), 160.0);
  EXPECT_DOUBLE_EQ(k0_coeff({80, -30}), 80.0);
  EXPECT_DOUBLE_EQ(k2_value(1.0, 1.0), std::numbers::ln2 / 60.0);
  EXPECT_DOUBLE_EQ(k2_value(2.0, 3.0), std::numbers::ln2 / 360.0);
  EXPECT_THROW(k2_value(0.0, 1.0), PreconditionError);
  EXPECT_THROW(k2_value(1.0, 0.5), PreconditionError);
}

TEST(Certificate, K1FromItsDefinition) {
  // K1 = (L + 4 delta)/(L - 74 delta) * 4 sqrt2 lambda / K2, divided by lambda^2 delta.
  for (double delta : {0.5, 1.0, 3.0})
    for (double lambda : {1.0, 2.5}) {
      const double L = 100.0 * delta;
      const double K1 = (L + 4 * delta) / (L - 74 * delta) * 4 * std::sqrt(2.0) * lambda / k2_value(delta, lambda);
      EXPECT_NEAR(K1 / (lambda * lambda * delta), k1_coeff({100, 100}), 1e-9);
    }
  EXPECT_EQ(k1_coeff({74, 100}), kInf);
  EXPECT_EQ(k1_coeff({60, 100}), kInf);
}

TEST(Certificate, ReproducesConstantAtDefaultParams) {
  const auto r = morse_constant({100, 100});
  EXPECT_TRUE(r.valid());
  EXPECT_EQ(std::ceil(r.k_total), 2460.0);
  EXPECT_NEAR(r.k_total, 500.0 + 104.0 / 26.0 * 240.0 * std::sqrt(2.0) / std::log(2.0) + 1.0, 1e-9);
}

TEST(Certificate, Validity) {
  EXPECT_FALSE(morse_constant({79, 100}).valid());  // needs l > 79
  EXPECT_TRUE(morse_constant({79.5, 100}).valid());
  EXPECT_FALSE(morse_constant({120, 100}).valid());  // d < l
  EXPECT_TRUE(morse_constant({120, 120}).valid());
  EXPECT_EQ(morse_constant({79, 100}).k_total, kInf);
  const auto m = validity_margins({100, 100});
  ASSERT_EQ(m.size(), 4u);
  EXPECT_DOUBLE_EQ(m[0].value, 21.0);
  EXPECT_DOUBLE_EQ(m[1].value, 0.0);
  EXPECT_DOUBLE_EQ(m[2].value, 88.0);
  EXPECT_DOUBLE_EQ(m[3].value, 84.0);
}

TEST(Certificate, MonotoneInD) {
  for (double l = 80; l <= 400; l += 20)
    for (double d = l; d + 5 <= 400; d += 5) EXPECT_LE(morse_constant({l, d}).k_total, morse_constant({l, d + 5}).k_total);
}

TEST(Certificate, K1DecreasesTowardItsLimit) {
  double prev = kInf;
  for (double l = 75; l <= 5000; l *= 1.1) {
    const double k1 = k1_coeff({l, l});
    EXPECT_LT(k1, prev);
    EXPECT_GT(k1, k1_limit());
    prev = k1;
  }
}

TEST(Certificate, OptimizerBeatsDefaultAndRespectsFloor) {
  const auto opt = optimize_constant({});
  EXPECT_LT(opt.k, morse_constant({100, 100}).k_total);
  EXPECT_GE(opt.k, k1_limit() + 5 * 79 + 1);
  EXPECT_NEAR(morse_constant(opt.params).k_total, opt.k, 1e-9);
  EXPECT_TRUE(morse_constant(opt.params).valid());
  // Along d = l the objective is 5l + k1(l) + 1; the stationary point solves
  // 5 = 78 * 240 sqrt2 / ln2 / (l - 74)^2.
  const double l_star = 74.0 + std::sqrt(78.0 * k1_limit() / 5.0);
  EXPECT_NEAR(opt.params.l, l_star, 1e-3);
  EXPECT_NEAR(opt.params.d, opt.params.l, 1e-3);
  EXPECT_NEAR(opt.k, morse_constant({l_star, l_star}).k_total, 1e-6);
}

TEST(Certificate, SinglePointGrid) {
  const auto opt = optimize_constant({100, 100, 100, 100, 1, 1}, 0);
  EXPECT_DOUBLE_EQ(opt.params.l, 100.0);
  EXPECT_DOUBLE_EQ(opt.k, morse_constant({100, 100}).k_total);
  EXPECT_THROW(optimize_constant({70, 75, 70, 75, 5, 5}), Error);
}

TEST(Certificate, LipschitzReduction) { EXPECT_DOUBLE_EQ(with_lipschitz_reduction(100.0), 1708.0); }

TEST(Certificate, Identities) {
  EXPECT_LE(telescoping_check(3.0, 0.1, 0.0, 1.0, 2.5, 7.0), 1e-12);
  EXPECT_THROW(telescoping_check(1.0, 0.1, 2.0, 1.0, 3.0, 4.0), PreconditionError);
  EXPECT_LE(lemma23_exponent_check(2.0, 0.5, 1.5, 10.0), 1e-12);
  EXPECT_THROW(lemma23_exponent_check(0.0, 0.5, 1.5, 10.0), PreconditionError);
}
