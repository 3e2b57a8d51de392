#include "oracles.hpp"
#include "stablab/smoothness.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stablab;
using nlohmann::json;

namespace {

ObjectivePtr quad(double eps, double ridge = 0.0) {
  json cfg = {{"family", "shift_quadratic"}, {"dim", 1}, {"domain_radius", 2.0}, {"ridge", ridge}};
  if (eps > 0) cfg["adversarial"] = {{"epsilon", eps}};
  return make_objective(cfg);
}

}  // namespace

TEST(Estimate, SmoothQuadraticHasNoSlack) {
  auto obj = quad(0.0);
  SmoothnessCertificate c = estimate_constants(*obj, 20000, 1);
  EXPECT_TRUE(c.beta_fixed);
  EXPECT_NEAR(c.beta_hat, 1.0, 1e-9);
  EXPECT_LT(c.eta_hat, 1e-9);
}

TEST(Estimate, FittedBetaOnSmoothQuadratic) {
  auto obj = quad(0.0);
  SmoothnessCertificate c = estimate_constants(*obj, 20000, 1, {}, BetaPolicy::fit);
  EXPECT_FALSE(c.beta_fixed);
  EXPECT_NEAR(c.beta_hat, 1.0, 1e-6);
  EXPECT_LT(c.eta_hat, 1e-6);
}

TEST(Estimate, AdversarialQuadraticApproachesGridOracle) {
  const double eps = 0.1;
  double grid = oracle::grid_eta([&](double x) { return oracle::shift_quadratic_1d_grad(x, 0.0, eps); },
                                 -1.0, 1.0, 2001, 1.0);
  EXPECT_NEAR(grid, 2 * eps, 2e-3);
  SmoothnessCertificate c = estimate_constants(*quad(eps), 100000, 2);
  EXPECT_LE(c.eta_hat, 2 * eps + 1e-12);
  EXPECT_NEAR(c.eta_hat, grid, 0.05 * grid);
}

TEST(Estimate, EtaHatGrowsWithN) {
  auto obj = quad(0.1);
  double prev = 0.0;
  for (int N : {10, 100, 1000, 10000}) {
    double e = estimate_constants(*obj, N, 4).eta_hat;
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST(Estimate, PairStreamIsPrefixStable) {
  auto obj = quad(0.1);
  PairSampler a(*obj, 8), b(*obj, 8);
  for (int k = 0; k < 100; ++k) {
    SamplePair p = a.next(), q = b.next();
    EXPECT_EQ(p.theta1, q.theta1);
    EXPECT_EQ(p.theta2, q.theta2);
    EXPECT_EQ(p.z, q.z);
  }
}

TEST(Estimate, HardInstanceStaysBelowJump) {
  auto obj = make_objective({{"family", "hard_instance"}, {"horizon", 3}, {"eta", 0.5}});
  SmoothnessCertificate c = estimate_constants(*obj, 20000, 6);
  EXPECT_LE(c.eta_hat, std::sqrt(2.0) * 0.5 + 1e-12);
  EXPECT_GE(c.eta_hat, 0.5 * 0.9);
}

TEST(Estimate, RejectsTooFewPairs) {
  EXPECT_THROW(estimate_constants(*quad(0.1), 1, 0), InvalidInput);
}

TEST(Descent, HoldsWithCorrectConstants) {
  PropertyReport r = check_descent(*quad(0.1), 1.0, 0.2, 20000, 3);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.pairs_tested, 20000);
}

TEST(Descent, SmoothQuadraticWithoutSlack) {
  EXPECT_TRUE(check_descent(*quad(0.0), 1.0, 0.0, 5000, 3).passed());
}

TEST(Descent, UnderstatedEtaIsCaughtAndReplayable) {
  auto obj = quad(0.1);
  PropertyReport r = check_descent(*obj, 1.0, 0.0, 20000, 3);
  ASSERT_FALSE(r.passed());
  EXPECT_GT(r.worst_slack, 0.0);
  ASSERT_FALSE(r.violations.empty());
  EXPECT_LE(r.violations.size(), kMaxStoredViolations);
  for (const Violation& v : r.violations) {
    EXPECT_DOUBLE_EQ(property_slack(*obj, r, v.theta1, v.theta2, v.z), v.slack);
    EXPECT_GT(v.slack, r.tolerance);
    // Counterexamples sit across the kink: θ1 − z and θ2 − z have opposite signs.
    EXPECT_LE((v.theta1[0] - v.z[0]) * (v.theta2[0] - v.z[0]), 0.0);
  }
}

TEST(Cocoercive, HoldsAndDetects) {
  auto obj = quad(0.1);
  EXPECT_TRUE(check_cocoercive(*obj, 1.0, 0.2, 20000, 5).passed());
  EXPECT_FALSE(check_cocoercive(*obj, 1.0, 0.0, 20000, 5).passed());
}

TEST(Cocoercive, NonconvexUnsupported) {
  auto obj = make_objective({{"family", "tanh_regression"}});
  EXPECT_THROW(check_cocoercive(*obj, 1.0, 0.0, 10, 0), Unsupported);
}

TEST(Expansive, SmoothQuadraticHalfStep) {
  EXPECT_TRUE(check_update_expansiveness(*quad(0.0), 0.5, ExpansionMode::convex, 5000, 1).passed());
}

TEST(Expansive, AdversarialAllModes) {
  auto obj = quad(0.1);
  EXPECT_TRUE(check_update_expansiveness(*obj, 1.0, ExpansionMode::general, 20000, 1).passed());
  EXPECT_TRUE(check_update_expansiveness(*obj, 1.0, ExpansionMode::convex, 20000, 1).passed());
  EXPECT_TRUE(check_update_expansiveness(*obj, 1.0, ExpansionMode::strongly, 20000, 1).passed());
}

TEST(Expansive, StronglyConvexRidgeVariant) {
  auto obj = quad(0.0, 0.5);  // ½θ² + ½·0.5·θ² around z
  LemmaConstants k;
  k.gamma = 0.5;
  k.beta = 1.5;
  PropertyReport r = check_update_expansiveness(*obj, 0.5, ExpansionMode::strongly, 5000, 2, k);
  EXPECT_TRUE(r.passed());
  EXPECT_DOUBLE_EQ(r.gamma, 0.5);
}

TEST(Expansive, Preconditions) {
  auto obj = quad(0.1);
  EXPECT_THROW(check_update_expansiveness(*obj, 1.5, ExpansionMode::convex, 10, 1), InvalidInput);
  auto logistic = make_objective({{"family", "logistic"}});
  EXPECT_THROW(check_update_expansiveness(*logistic, 0.1, ExpansionMode::strongly, 10, 1), InvalidInput);
  EXPECT_EQ(expansion_mode_from_string("general"), ExpansionMode::general);
  EXPECT_THROW(expansion_mode_from_string("bogus"), InvalidInput);
}

TEST(Report, JsonCarriesCounts) {
  PropertyReport r = check_descent(*quad(0.1), 1.0, 0.0, 2000, 3);
  json j = to_json(r);
  EXPECT_EQ(j["violation_count"].get<int>(), r.violation_count);
  EXPECT_EQ(j["pairs_tested"].get<int>(), 2000);
}
