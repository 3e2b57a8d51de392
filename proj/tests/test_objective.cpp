#include "oracles.hpp"
#include "stablab/dataset.hpp"
#include "stablab/objective.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stablab;
using nlohmann::json;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

ObjectivePtr shift_quadratic_1d(double eps) {
  json cfg = {{"family", "shift_quadratic"}, {"dim", 1}};
  if (eps > 0) cfg["adversarial"] = {{"epsilon", eps}};
  return make_objective(cfg);
}

}  // namespace

TEST(ShiftQuadratic, AdversarialValueAtOne) {
  auto obj = shift_quadratic_1d(0.1);
  EXPECT_NEAR(obj->value(scalar(1.0), scalar(0.0)), 0.605, 1e-15);
}

TEST(ShiftQuadratic, ZeroEpsilonReducesToBase) {
  auto obj = shift_quadratic_1d(0.0);
  EXPECT_DOUBLE_EQ(obj->value(scalar(1.0), scalar(0.0)), 0.5);
  EXPECT_DOUBLE_EQ(obj->subgradient(scalar(1.3), scalar(0.2))[0], 1.1);
}

TEST(ShiftQuadratic, SubgradientAwayFromKink) {
  auto obj = shift_quadratic_1d(0.1);
  EXPECT_NEAR(obj->subgradient(scalar(2.0), scalar(0.0))[0], 2.1, 1e-15);
  EXPECT_NEAR(obj->subgradient(scalar(-2.0), scalar(0.0))[0], -2.1, 1e-15);
}

TEST(ShiftQuadratic, KinkTakesLowerEndpoint) {
  auto obj = shift_quadratic_1d(0.1);
  EXPECT_NEAR(obj->subgradient(scalar(0.3), scalar(0.3))[0], 0.1, 1e-15);
  InnerResult r = obj->inner_maximize(scalar(0.0), scalar(0.0));
  EXPECT_NEAR(r.maximizer[0], -0.1, 1e-15);
  EXPECT_NEAR(r.attained, 0.005, 1e-15);
}

TEST(ShiftQuadratic, InnerMaximizerAtOne) {
  auto obj = shift_quadratic_1d(0.1);
  InnerResult r = obj->inner_maximize(scalar(1.0), scalar(0.0));
  EXPECT_NEAR(r.maximizer[0], -0.1, 1e-15);
  EXPECT_NEAR(r.attained, 0.605, 1e-15);
}

TEST(ShiftQuadratic, InnerMaxNeedsAdversarialConfig) {
  EXPECT_THROW(shift_quadratic_1d(0.0)->inner_maximize(scalar(0.7), scalar(0.2)), Unsupported);
}

TEST(ShiftQuadratic, ZeroEpsilonInnerMaxIsIdentity) {
  auto obj = make_objective({{"family", "shift_quadratic"}, {"dim", 1}, {"adversarial", {{"epsilon", 0.0}}}});
  InnerResult r = obj->inner_maximize(scalar(0.7), scalar(0.2));
  EXPECT_DOUBLE_EQ(r.maximizer[0], 0.2);
  EXPECT_DOUBLE_EQ(r.attained, 0.125);
}

TEST(ShiftQuadratic, MatchesOracleOnRandomPoints) {
  auto inf = make_objective({{"family", "shift_quadratic"}, {"dim", 3},
                             {"adversarial", {{"epsilon", 0.07}}}});
  auto l2 = make_objective({{"family", "shift_quadratic"}, {"dim", 3},
                            {"adversarial", {{"epsilon", 0.07}, {"p", 2}}}});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 200; ++k) {
    Vector th(3), z(3);
    for (int j = 0; j < 3; ++j) {
      th[j] = 4 * u(rng);
      z[j] = u(rng);
    }
    EXPECT_NEAR(inf->value(th, z), oracle::shift_quadratic_linf(th, z, 0.07), 1e-12);
    EXPECT_NEAR(l2->value(th, z), oracle::shift_quadratic_l2(th, z, 0.07), 1e-12);
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(inf->subgradient(th, z)[j], oracle::shift_quadratic_1d_grad(th[j], z[j], 0.07), 1e-12);
  }
}

TEST(ShiftQuadratic, AnalyticConstants) {
  auto obj = shift_quadratic_1d(0.1);
  EXPECT_DOUBLE_EQ(obj->constants().beta, 1.0);
  EXPECT_NEAR(obj->constants().eta, 0.2, 1e-15);
  ASSERT_TRUE(obj->constants().gamma.has_value());
  EXPECT_TRUE(obj->convex());
  EXPECT_DOUBLE_EQ(shift_quadratic_1d(0.0)->constants().eta, 0.0);
}

TEST(ShiftQuadratic, DomainViolationRejected) {
  auto obj = shift_quadratic_1d(0.1);
  EXPECT_THROW(obj->value(scalar(10.5), scalar(0.0)), InvalidInput);
  EXPECT_THROW(obj->subgradient(scalar(0.0), scalar(3.0)), InvalidInput);
}

TEST(Logistic, LinfValueAndGradientMatchOracle) {
  auto obj = make_objective({{"family", "logistic"}, {"dim", 3},
                             {"adversarial", {{"epsilon", 0.05}, {"solver", "endpoint_enumeration"}}}});
  auto cf = make_objective({{"family", "logistic"}, {"dim", 3}, {"adversarial", {{"epsilon", 0.05}}}});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 200; ++k) {
    Vector th(3), x(3);
    for (int j = 0; j < 3; ++j) {
      th[j] = 2 * u(rng);
      x[j] = u(rng);
    }
    if (k % 10 == 0) th[1] = 0.0;  // exercise the tie-break
    double y = k % 2 ? 1.0 : -1.0;
    Example z(4);
    z << x, y;
    EXPECT_NEAR(obj->value(th, z), oracle::logistic_linf(th, x, y, 0.05), 1e-12);
    EXPECT_NEAR(cf->value(th, z), oracle::logistic_linf(th, x, y, 0.05), 1e-12);
    Vector g = oracle::logistic_linf_grad(th, x, y, 0.05);
    EXPECT_LT((obj->subgradient(th, z) - g).norm(), 1e-12);
    EXPECT_LT((cf->subgradient(th, z) - g).norm(), 1e-12);
  }
}

TEST(Logistic, L2ValueMatchesOracle) {
  auto obj = make_objective({{"family", "logistic"}, {"dim", 2},
                             {"adversarial", {{"epsilon", 0.1}, {"p", 2}}}});
  Vector th(2), x(2);
  th << 0.7, -1.2;
  x << 0.3, 0.4;
  Example z(3);
  z << x, -1.0;
  EXPECT_NEAR(obj->value(th, z), oracle::logistic_l2(th, x, -1.0, 0.1), 1e-12);
}

TEST(Tanh, PgdIsBoundedByBaseAndConstant) {
  auto base = make_objective({{"family", "tanh_regression"}, {"dim", 2}});
  auto adv = make_objective({{"family", "tanh_regression"}, {"dim", 2},
                             {"adversarial", {{"epsilon", 0.1}, {"solver", "pgd"}}}});
  EXPECT_FALSE(adv->convex());
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    Example z = base->sample_example(rng);
    Vector th = Vector::Random(2);
    double g = base->value(th, z);
    double h = adv->value(th, z);
    EXPECT_GE(h, g - 1e-15);
    EXPECT_LE(h, 4.0);
  }
}

TEST(HardInstance, ValueAtOriginWithPositiveV) {
  auto obj = make_objective({{"family", "hard_instance"}, {"horizon", 3}, {"v", 1.0}});
  EXPECT_DOUBLE_EQ(obj->value(Vector::Zero(3), scalar(0.0)), 0.0);
}

TEST(HardInstance, RejectsShortDimension) {
  EXPECT_THROW(make_objective({{"family", "hard_instance"}, {"horizon", 4}, {"dim", 3}}), InvalidInput);
}

TEST(HardInstance, NeighborsHaveOneDifferingExample) {
  HardInstanceParams p;
  p.d = 2;
  p.horizon = 2;
  auto [obj, pair] = make_hard_instance(p, 5);
  ASSERT_EQ(pair.n(), 5);
  int ones = 0, differ = 0;
  for (int i = 0; i < 5; ++i) {
    ones += pair.S[i][0] == 1.0;
    EXPECT_EQ(pair.S_prime[i][0], 0.0);
    differ += pair.S[i][0] != pair.S_prime[i][0];
  }
  EXPECT_EQ(ones, 1);
  EXPECT_EQ(differ, 1);
  EXPECT_EQ(pair.S[pair.differing_index - 1][0], 1.0);
}

TEST(Config, UnknownKeysAndFamiliesRejected) {
  EXPECT_THROW(make_objective({{"family", "shift_quadratic"}, {"dimension", 2}}), InvalidInput);
  EXPECT_THROW(make_objective({{"family", "hinge"}}), InvalidInput);
  EXPECT_THROW(make_objective({{"family", "logistic"}, {"adversarial", {{"epsilon", -1.0}}}}), InvalidInput);
}

TEST(Config, RoundTripsThroughJson) {
  auto obj = make_objective({{"family", "logistic"}, {"dim", 4}, {"ridge", 0.1},
                             {"adversarial", {{"epsilon", 0.02}, {"p", 2}}}});
  auto again = make_objective(obj->to_json());
  EXPECT_EQ(again->to_json(), obj->to_json());
}

TEST(Neighbors, DifferOnlyAtIndex) {
  auto dist = make_uniform_box(2, 1.0);
  NeighborPair p = make_neighbors(*dist, 10, 4, 77);
  for (int i = 0; i < 10; ++i) {
    if (i == 3)
      EXPECT_NE(p.S[i], p.S_prime[i]);
    else
      EXPECT_EQ(p.S[i], p.S_prime[i]);
  }
  NeighborPair same = make_neighbors(*dist, 10, 4, 77, true);
  EXPECT_EQ(same.S, same.S_prime);
  EXPECT_THROW(make_neighbors(*dist, 10, 11, 77), InvalidInput);
  EXPECT_THROW(make_neighbors(*dist, 10, 0, 77), InvalidInput);
}

TEST(Neighbors, SingleExampleSharesNothing) {
  auto dist = make_uniform_box(1, 1.0);
  NeighborPair p = make_neighbors(*dist, 1, 1, 3);
  EXPECT_NE(p.S[0], p.S_prime[0]);
}
