#include "oracles.hpp"
#include "stablab/dataset.hpp"
#include "stablab/stability.hpp"
#include "stablab/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace stablab;
using nlohmann::json;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

ObjectivePtr plain_quadratic() { return make_objective({{"family", "shift_quadratic"}, {"dim", 1}}); }

ObjectivePtr adversarial_quadratic(double eps) {
  return make_objective({{"family", "shift_quadratic"}, {"dim", 1}, {"domain_radius", 2.0},
                         {"adversarial", {{"epsilon", eps}}}});
}

// First seed whose permutation of {0, 1} is the identity.
std::uint64_t identity_order_seed() {
  for (std::uint64_t s = 0;; ++s) {
    IndexStream stream(SamplingScheme::fixed_permutation, 2, s);
    if (stream.permutation() == std::vector<int>{0, 1}) return s;
  }
}

}  // namespace

TEST(Coupled, TwoStepHandExample) {
  auto obj = make_objective({{"family", "shift_quadratic"}, {"dim", 1}, {"example_radius", 4.0}});
  NeighborPair pair{{scalar(0.0), scalar(2.0)}, {scalar(0.0), scalar(4.0)}, 2};
  CoupledRun r = coupled_run(*obj, pair, ScheduleSpec::fixed(0.5), SamplingScheme::fixed_permutation, 2,
                             identity_order_seed());
  ASSERT_EQ(r.delta.size(), 3u);
  EXPECT_DOUBLE_EQ(r.delta[1], 0.0);
  EXPECT_DOUBLE_EQ(r.delta[2], 1.0);
  EXPECT_DOUBLE_EQ(r.theta_S[0], 1.0);
  EXPECT_DOUBLE_EQ(r.theta_S_prime[0], 2.0);
  EXPECT_EQ(r.indices, (std::vector<int>{1, 2}));
}

TEST(Coupled, EqualDataGivesZero) {
  auto obj = adversarial_quadratic(0.1);
  auto dist = make_uniform_box(1, 1.0);
  NeighborPair pair = make_neighbors(*dist, 20, 3, 1, true);
  CoupledRun r = coupled_run(*obj, pair, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 200, 2);
  for (double d : r.delta) EXPECT_EQ(d, 0.0);
  for (double d : r.delta_swa) EXPECT_EQ(d, 0.0);
}

TEST(Coupled, MismatchedSizesRejected) {
  auto obj = plain_quadratic();
  NeighborPair pair{{scalar(0.0), scalar(2.0)}, {scalar(0.0)}, 1};
  EXPECT_THROW(coupled_run(*obj, pair, ScheduleSpec::fixed(0.5), SamplingScheme::with_replacement, 2, 1),
               InvalidInput);
}

TEST(Coupled, HardInstanceTwoSteps) {
  HardInstanceParams p;
  p.d = 2;
  p.horizon = 2;
  auto [obj, pair] = make_hard_instance(p, 2);
  CoupledRun r = coupled_run(*obj, pair, ScheduleSpec::fixed(0.1), SamplingScheme::full_batch, 2, 0);
  EXPECT_NEAR(r.delta.back(), std::sqrt(0.05 * 0.05 + 0.1 * 0.1), 1e-15);
  EXPECT_NEAR(r.delta.back(), 0.111803, 1e-6);
}

TEST(Coupled, HardInstanceFollowsOracle) {
  HardInstanceParams p;
  p.d = 12;
  p.horizon = 10;
  p.eta = 0.7;
  p.K = 2.0;
  const int n = 3;
  const double alpha = 0.05;
  auto [obj, pair] = make_hard_instance(p, n);
  CoupledRun r = coupled_run(*obj, pair, ScheduleSpec::fixed(alpha), SamplingScheme::full_batch, 10, 0);
  for (int t = 1; t <= 10; ++t) {
    Vector expect = oracle::hard_instance_theta(12, 10, n, alpha, 0.7, 2.0, t);
    EXPECT_NEAR(r.delta[t], expect.norm(), 1e-12 * expect.norm());
    EXPECT_LT((hard_instance_closed_form(p, n, alpha, t) - expect).norm(), 1e-14);
  }
  EXPECT_LT(r.theta_S_prime.norm(), 1e-300);
}

TEST(Coupled, SmoothPathCertificate) {
  auto obj = plain_quadratic();
  auto dist = make_uniform_box(1, 1.0);
  NeighborPair pair = make_neighbors(*dist, 10, 4, 5);
  CoupledRun r = coupled_run(*obj, pair, ScheduleSpec::fixed(0.5), SamplingScheme::with_replacement, 500, 3);
  EXPECT_TRUE(r.path_certified);
  EXPECT_EQ(r.path_violations, 0);
  for (int t = 1; t <= 500; ++t)
    if (r.indices[t - 1] != 4) EXPECT_LE(r.delta[t], r.delta[t - 1] + 1e-15);
}

TEST(Uas, RequiresTwoReplicates) {
  auto obj = plain_quadratic();
  auto dist = make_uniform_box(1, 1.0);
  EXPECT_THROW(measure_uas(*obj, *dist, 5, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 10, 1, 0),
               InvalidInput);
}

TEST(Uas, IdenticalPairIsFlat) {
  auto obj = adversarial_quadratic(0.1);
  auto dist = make_uniform_box(1, 1.0);
  UasOptions opt;
  opt.identical = true;
  auto rep = measure_uas(*obj, *dist, 10, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 50, 4, 1, opt);
  for (double d : rep.delta_mean) EXPECT_EQ(d, 0.0);
}

TEST(Uas, ThreadCountDoesNotChangeResults) {
  auto obj = adversarial_quadratic(0.1);
  auto dist = make_uniform_box(1, 1.0);
  UasOptions one, three;
  three.jobs = 3;
  auto a = measure_uas(*obj, *dist, 10, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 100, 9, 7, one);
  auto b = measure_uas(*obj, *dist, 10, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 100, 9, 7, three);
  EXPECT_EQ(a.final_deltas, b.final_deltas);
  EXPECT_EQ(a.delta_mean, b.delta_mean);
}

TEST(Uas, StaysBelowConvexBound) {
  auto obj = adversarial_quadratic(0.1);
  auto dist = make_uniform_box(1, 1.0);
  const int n = 20, T = 200;
  auto rep = measure_uas(*obj, *dist, n, ScheduleSpec::fixed(0.05), SamplingScheme::with_replacement, T, 50, 3);
  EXPECT_EQ(rep.path_violations, 0);
  const auto& c = obj->constants();
  double ub = (c.eta + 2 * c.L / n) * 0.05 * T;
  EXPECT_LE(rep.delta_mean.back(), ub + 2 * ci95_half_width(rep.final_deltas));
  EXPECT_LE(rep.delta_swa_mean.back(), ub / 2 + 2 * ci95_half_width(rep.final_swa_deltas));
}

TEST(Uas, WorstCaseModeLimitsN) {
  auto obj = plain_quadratic();
  auto dist = make_uniform_box(1, 1.0);
  UasOptions opt;
  opt.mode = UasMode::worst_case;
  EXPECT_THROW(measure_uas(*obj, *dist, 9, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 5, 2, 0, opt),
               InvalidInput);
  auto rep = measure_uas(*obj, *dist, 4, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 5, 2, 0, opt);
  EXPECT_EQ(rep.mode, UasMode::worst_case);
}

TEST(Gaps, ZeroStepGapIsNoise) {
  auto obj = adversarial_quadratic(0.1);
  auto dist = make_uniform_box(1, 1.0);
  auto g = estimate_gaps(*obj, *dist, 20, ScheduleSpec::fixed(0.0), SamplingScheme::with_replacement, 50, 40,
                         2000, 11);
  EXPECT_LE(std::abs(g.gen_gap), 3 * g.gen_gap_ci + 1e-12);
  EXPECT_THROW(estimate_gaps(*obj, *dist, 20, ScheduleSpec::fixed(0.0), SamplingScheme::with_replacement, 5, 4,
                             999, 1),
               InvalidInput);
}

TEST(Gaps, OptGapUnavailableForNonconvex) {
  auto obj = make_objective({{"family", "tanh_regression"}});
  auto dist = make_tanh_data(2, 1.0, 1.0, 0.1);
  GapOptions opt;
  opt.opt_gap = true;
  auto g = estimate_gaps(*obj, *dist, 10, ScheduleSpec::fixed(0.1), SamplingScheme::with_replacement, 20, 2, 1000,
                         1, opt);
  EXPECT_FALSE(g.opt_gap.has_value());
  EXPECT_FALSE(g.opt_gap_note.empty());
}

TEST(ReferenceMinimizer, QuadraticMean) {
  auto obj = plain_quadratic();
  Dataset S{scalar(1.0), scalar(0.5), scalar(-0.3)};
  auto ref = reference_minimizer(*obj, S);
  EXPECT_NEAR(ref.theta[0], 0.4, 1e-8);
  EXPECT_LE(ref.grad_norm, 1e-8);
}

TEST(Convergence, FloorEnforced) {
  auto obj = make_objective({{"family", "tanh_regression"}});
  auto dist = make_tanh_data(2, 1.0, 1.0, 0.1);
  std::mt19937_64 rng(1);
  Dataset S = dist->sample_many(10, rng);
  EXPECT_THROW(convergence_probe(*obj, S, SamplingScheme::with_replacement, 4, 2, 0.5, 1), InvalidInput);
}

TEST(Convergence, SmoothConvexShrinks) {
  auto obj = plain_quadratic();
  auto dist = make_uniform_box(1, 1.0);
  std::mt19937_64 rng(1);
  Dataset S = dist->sample_many(20, rng);
  auto a = convergence_probe(*obj, S, SamplingScheme::with_replacement, 100, 4, 0.5, 1);
  auto b = convergence_probe(*obj, S, SamplingScheme::with_replacement, 10000, 4, 0.5, 1);
  EXPECT_TRUE(a.within_bound);
  EXPECT_TRUE(b.within_bound);
  EXPECT_LT(b.min_mean_sq_grad, a.min_mean_sq_grad);
}

TEST(StabilityCsv, HeaderAndGapOnLastRow) {
  auto obj = adversarial_quadratic(0.1);
  auto dist = make_uniform_box(1, 1.0);
  auto schedule = ScheduleSpec::fixed(0.1);
  auto rep = measure_uas(*obj, *dist, 10, schedule, SamplingScheme::with_replacement, 5, 3, 1);
  auto overlay = bound_overlay(obj->constants(), true, 10, schedule, rep.t, rep.alphas);
  const auto& c = obj->constants();
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    EXPECT_NEAR(overlay.ub_convex[k], (c.eta + 2 * c.L / 10) * 0.1 * rep.t[k], 1e-12);
    EXPECT_NEAR(overlay.ub_swa[k], overlay.ub_convex[k] / 2, 1e-15);
  }
  GapEstimate gap;
  gap.gen_gap = 0.25;
  gap.gen_gap_ci = 0.125;
  std::ostringstream os;
  write_stability_csv(rep, overlay, gap, os);
  std::istringstream is(os.str());
  std::string line, last;
  std::getline(is, line);
  EXPECT_EQ(line, "t,delta_mean,delta_lo,delta_hi,delta_swa_mean,ub_convex,ub_swa,lb,gen_gap,gen_gap_ci");
  int rows = 0;
  while (std::getline(is, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_NE(last.find(",0.25,0.125"), std::string::npos);
}

TEST(Stats, RanksAndCorrelation) {
  EXPECT_EQ(average_ranks({3.0, 1.0, 3.0}), (std::vector<double>{2.5, 1.0, 2.5}));
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 25, 40}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {5, 5, 5}), 0.0);
  EXPECT_NEAR(ci95_half_width({1.0, 2.0, 3.0, 4.0}), 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}
