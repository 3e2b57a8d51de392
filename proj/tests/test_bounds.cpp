#include "stablab/bounds.hpp"
#include "stablab/sgd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace stablab;
using nlohmann::json;

TEST(UbConvex, WorkedValues) {
  EXPECT_NEAR(ub_convex(1.0, 0.1, 100, 10.0), 1.2, 1e-12);
  EXPECT_NEAR(ub_convex(1.0, 0.0, 100, 10.0), 0.2, 1e-12);
  // Large n leaves only the η residual.
  EXPECT_NEAR(ub_convex(1.0, 0.1, 1000000000, 10.0), 1.0, 1e-7);
  EXPECT_NEAR(ub_convex(1.0, 0.1, 100, std::vector<double>(1000, 0.01)), 1.2, 1e-12);
}

TEST(UbConvex, NegativeInputsRejected) {
  EXPECT_THROW(ub_convex(-1.0, 0.1, 100, 10.0), InvalidInput);
  EXPECT_THROW(ub_convex(1.0, -0.1, 100, 10.0), InvalidInput);
  EXPECT_THROW(ub_convex(1.0, 0.1, 100, std::vector<double>{0.1, -0.1}), InvalidInput);
}

TEST(UbConvexSubopt, WorkedValueAndReduction) {
  EXPECT_NEAR(ub_convex_subopt(1.0, 1.0, 0.1, 0.05, 100, 10.0), 3.2, 1e-12);
  // Exact attack: η = 2·L_z·ε.
  EXPECT_NEAR(ub_convex_subopt(1.3, 0.7, 0.1, 0.0, 50, 4.0), ub_convex(1.3, 2 * 0.7 * 0.1, 50, 4.0), 1e-12);
}

TEST(UbNonconvex, ForcedStartStep) {
  NonconvexBound b = ub_nonconvex(1.0, 1.0, 1.0, 0.1, 101, 10, 1.0, 1);
  EXPECT_NEAR(b.value, 1.22, 1e-12);
  EXPECT_EQ(b.t0, 1);
}

TEST(UbNonconvex, StartAtHorizonLeavesConstantTerm) {
  const double B = 2.0, beta = 0.5, L = 1.5, eta = 0.2;
  const int n = 40, T = 30;
  NonconvexBound b = ub_nonconvex(B, beta, L, eta, n, T, 1.0, T);
  EXPECT_NEAR(b.value, B * T / (n - 1.0) + (2 * L * L + L * eta * n) / (beta * (n - 1.0)), 1e-12);
}

TEST(UbNonconvex, EnumerationBeatsEveryStart) {
  const double B = 1.0, beta = 2.0, L = 1.0, eta = 0.1, c = 0.4;
  const int n = 50, T = 2000;
  NonconvexBound best = ub_nonconvex(B, beta, L, eta, n, T, c);
  for (int t0 = 1; t0 <= n; ++t0) {
    double v = B * t0 / (n - 1.0) + (2 * L * L + L * eta * n) / (beta * (n - 1.0)) * std::pow(double(T) / t0, beta * c);
    EXPECT_LE(best.value, v + 1e-12);
  }
  EXPECT_FALSE(best.simplified.has_value());
  EXPECT_TRUE(ub_nonconvex(B, beta, L, eta, n, T, 1.0 / beta).simplified.has_value());
}

TEST(UbStronglyConvex, WorkedValues) {
  EXPECT_NEAR(ub_strongly_convex(1.0, 0.05, 0.5, 100), 0.14, 1e-12);
  EXPECT_NEAR(ub_strongly_convex(1.0, 0.0, 0.5, 100), 0.04, 1e-12);
}

TEST(UbSwa, WorkedValues) {
  EXPECT_NEAR(ub_swa(1.0, 0.1, 100, 10.0), 0.6, 1e-12);
  EXPECT_NEAR(ub_swa(2.0, 0.0, 100, 10.0), 4.0 * 10.0 / 100, 1e-12);
}

TEST(UbSwa, HalfOfConvexUnderFuzz) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> nn(1, 100000);
  for (int k = 0; k < 10000; ++k) {
    double L = u(rng), eta = u(rng), s = u(rng) * 100;
    int n = nn(rng);
    double full = ub_convex(L, eta, n, s);
    EXPECT_LE(std::abs(ub_swa(L, eta, n, s) - full / 2), 1e-12 * std::max(1.0, full));
  }
}

TEST(OptConvex, WorkedValue) {
  std::vector<double> alphas(100, 0.1);
  EXPECT_NEAR(opt_convex(1.0, 1.0, alphas), 0.2, 1e-12);
  EXPECT_TRUE(std::isinf(opt_convex(1.0, 1.0, 0.0, 0.0)));
}

TEST(OptConvex, ConstantStepMinimizer) {
  // (D² + L²Tα²)/(Tα) is smallest at α = D/(L√T).
  const double D = 1.5, L = 2.0, T = 400;
  double star = D / (L * std::sqrt(T));
  double v = opt_convex(D, L, T * star, T * star * star);
  for (double f : {0.5, 0.9, 1.1, 2.0}) EXPECT_LT(v, opt_convex(D, L, T * star * f, T * star * star * f * f));
}

TEST(OptStronglyConvex, WorkedValues) {
  EXPECT_NEAR(opt_strongly_convex(1.0, 1.0, 100), 0.01, 1e-15);
  EXPECT_NEAR(opt_strongly_convex(1.0, 2.0, 100), 0.04, 1e-15);
}

TEST(Tradeoff, TermsAndValueAtTstar) {
  const double L = 1.0, eta = 0.1, D = 1.0, alpha = 0.01;
  const int n = 100;
  TradeoffTerms t = tradeoff_fixed(L, eta, n, D, alpha, 300);
  EXPECT_NEAR(t.additional, L * eta * 300 * alpha, 1e-15);
  EXPECT_NEAR(t.total, t.additional + t.stability + t.optimization + t.residual, 1e-15);
  double ts = tstar(D, alpha, L, eta, n);
  double at = tradeoff_fixed(L, eta, n, D, alpha, ts).total;
  EXPECT_LE(at, 2 * std::sqrt(L * eta + 2 * L * L / n) * D + L * L * alpha + 1e-9);
}

TEST(LbUas, WorkedValues) {
  EXPECT_NEAR(lb_uas(1.0, 1.0, 0.1, 4, 1000000000), 0.2, 1e-8);
  EXPECT_NEAR(lb_uas(0.0, 1.0, 0.1, 4, 10), 0.04, 1e-15);
  EXPECT_NEAR(lb_uas(1.0, 1.0, 0.1, 4, 10, 0.5, 2.0), 0.1 + 0.08, 1e-15);
}

TEST(Beta2, WorkedValue) {
  EXPECT_NEAR(beta2_strongly_concave(1.0, 1.0, 0.5, 1.0), 3.0, 1e-15);
  EXPECT_NEAR(beta2_strongly_concave(1.0, 1.0, 1e12, 1.0), 1.0, 1e-9);
}

TEST(ConvergenceBound, WorkedValues) {
  EXPECT_NEAR(convergence_bound(0.2, 0.5, 0.0, 1.0, 1.0, 1e300), 0.16, 1e-12);
  EXPECT_NEAR(convergence_bound(0.0, 0.5, 0.0, 1.0, 1.0, 100), 2 * 1.0 / (0.5 * 10), 1e-15);
  double rate = convergence_bound(0.0, 0.5, 0.3, 1.0, 1.0, 100);
  EXPECT_NEAR(convergence_bound(0.0, 0.5, 0.3, 1.0, 1.0, 400), rate / 2, 1e-15);
}

TEST(Evaluate, StepSourcesAgree) {
  double a = evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100}, {"sum_alpha", 10.0}}).value;
  double b = evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100},
                                         {"alphas", std::vector<double>(1000, 0.01)}}).value;
  double c = evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100},
                                         {"schedule", {{"kind", "fixed"}, {"alpha", 0.01}}}, {"T", 1000}}).value;
  EXPECT_NEAR(a, 1.2, 1e-12);
  EXPECT_NEAR(b, 1.2, 1e-12);
  EXPECT_NEAR(c, 1.2, 1e-12);
}

TEST(Evaluate, StepFlag) {
  BoundReport r = evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100}, {"beta", 200.0},
                                               {"alphas", std::vector<double>(10, 0.01)}});
  ASSERT_EQ(r.flags.size(), 1u);
  EXPECT_EQ(r.flags[0].status, "violated");
  BoundReport ok = evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100}, {"beta", 1.0},
                                                {"alphas", std::vector<double>(10, 0.01)}});
  EXPECT_EQ(ok.flags[0].status, "satisfied");
}

TEST(Evaluate, RejectsUnknownIdsAndKeys) {
  EXPECT_THROW(evaluate_bound("no_such_bound", json::object()), InvalidInput);
  EXPECT_THROW(evaluate_bound("ub_strongly_convex", {{"L", 1.0}, {"eta", 0.1}, {"gamma", 1.0}, {"n", 10}, {"x", 1}}),
               InvalidInput);
  EXPECT_THROW(evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100}}), InvalidInput);
  EXPECT_THROW(evaluate_bound("ub_convex", {{"L", 1.0}, {"eta", 0.1}, {"n", 100}, {"sum_alpha", 1.0},
                                            {"alphas", {0.1}}}),
               InvalidInput);
}

TEST(Evaluate, EveryIdReportsJson) {
  for (const auto& id : bound_ids()) EXPECT_FALSE(id.empty());
  json j = to_json(evaluate_bound("tradeoff_fixed", {{"L", 1.0}, {"eta", 0.1}, {"n", 100}, {"D", 1.0},
                                                     {"alpha", 0.01}, {"T", 300}}));
  EXPECT_EQ(j["bound"], "tradeoff_fixed");
  EXPECT_TRUE(j["terms"].contains("additional"));
  EXPECT_TRUE(j["terms"].contains("residual"));
}
