#include "stablab/stability.hpp"
#include "stablab/bounds.hpp"
#include "stablab/format.hpp"
#include "stablab/parallel.hpp"
#include "stablab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace stablab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_recorded(int t, int T, int every) { return t % every == 0 || t == T; }

struct ReplicateDraw {
  NeighborPair pair;
  std::uint64_t index_seed = 0;
};

ReplicateDraw draw_replicate(const ExampleDistribution& dist, int n, std::uint64_t master, int r,
                             bool identical = false) {
  const std::uint64_t seed_r = replicate_seed(master, r);
  std::mt19937_64 pick(derive_seed(seed_r, streams::differing_index));
  const int i = std::uniform_int_distribution<int>(1, n)(pick);
  return {make_neighbors(dist, n, i, derive_seed(seed_r, streams::data), identical),
          derive_seed(seed_r, streams::index)};
}

}  // namespace

CoupledRun coupled_run(const Objective& obj, const NeighborPair& pair, const ScheduleSpec& schedule,
                       SamplingScheme scheme, int T, std::uint64_t seed, const CoupledOptions& options) {
  require(pair.S.size() == pair.S_prime.size(), "coupled_run: S and S' differ in size");
  require(!pair.S.empty(), "coupled_run: empty dataset");
  require(pair.differing_index >= 1 && pair.differing_index <= pair.n(),
          "coupled_run: differing index outside [1, n]");
  require(T >= 0, "coupled_run: T must be >= 0");
  require(options.record_every >= 1, "coupled_run: record_every must be >= 1");
  schedule.validate();
  const double radius = options.radius.value_or(obj.domain_radius());
  require(radius <= obj.domain_radius(), "coupled_run: projection radius exceeds the objective domain");

  const ConstantsRecord& c = obj.constants();
  CoupledRun out;
  out.differing_index = pair.differing_index;
  out.alphas = schedule_series(schedule, T);
  out.path_certified = obj.convex() && std::all_of(out.alphas.begin(), out.alphas.end(), [&](double a) {
                         return a * c.beta <= 1.0 + 1e-12;
                       });
  out.indices.reserve(static_cast<std::size_t>(T));

  const int n = pair.n();
  Vector theta1 = Vector::Zero(obj.param_dim());
  Vector theta2 = Vector::Zero(obj.param_dim());
  Vector sum1 = Vector::Zero(obj.param_dim());
  Vector sum2 = Vector::Zero(obj.param_dim());
  double delta = 0.0;
  out.t.push_back(0);
  out.delta.push_back(0.0);
  out.delta_swa.push_back(0.0);

  IndexStream stream(scheme, n, seed);
  for (int t = 1; t <= T; ++t) {
    const double alpha = out.alphas[static_cast<std::size_t>(t - 1)];
    const int index = stream.next();
    theta1 = sgd_step(obj, pair.S, theta1, index, alpha, radius).theta;
    theta2 = sgd_step(obj, pair.S_prime, theta2, index, alpha, radius).theta;
    const double next = (theta1 - theta2).norm();
    if (out.path_certified) {
      double hit;
      if (index < 0) {
        hit = 1.0 / n;
      } else {
        hit = (index + 1 == pair.differing_index) ? 1.0 : 0.0;
      }
      double slack = (next - delta) - (alpha * c.eta + 2.0 * c.L * alpha * hit);
      out.worst_path_slack = std::max(out.worst_path_slack, slack);
      if (slack > kPathTolerance) ++out.path_violations;
    }
    delta = next;
    sum1 += theta1;
    sum2 += theta2;
    out.indices.push_back(index + 1);
    if (is_recorded(t, T, options.record_every)) {
      out.t.push_back(t);
      out.delta.push_back(delta);
      out.delta_swa.push_back((sum1 - sum2).norm() / t);
    }
  }
  out.theta_S = theta1;
  out.theta_S_prime = theta2;
  out.swa_S = T > 0 ? Vector(sum1 / T) : theta1;
  out.swa_S_prime = T > 0 ? Vector(sum2 / T) : theta2;
  return out;
}

StabilityReport measure_uas(const Objective& obj, const ExampleDistribution& dist, int n,
                            const ScheduleSpec& schedule, SamplingScheme scheme, int T, int M,
                            std::uint64_t seed, const UasOptions& options) {
  require(M >= 2, "measure_uas: M must be >= 2");
  require(n >= 1, "measure_uas: n must be >= 1");
  if (options.mode == UasMode::worst_case) require(n <= 8, "measure_uas: worst-case mode needs n <= 8");
  CoupledOptions copt;
  copt.radius = options.radius;
  copt.record_every = options.record_every;

  std::vector<CoupledRun> runs(static_cast<std::size_t>(M));
  parallel_for(M, options.jobs, [&](int r) {
    ReplicateDraw draw = draw_replicate(dist, n, seed, r, options.identical);
    CoupledRun best;
    if (options.mode == UasMode::randomized) {
      best = coupled_run(obj, draw.pair, schedule, scheme, T, draw.index_seed, copt);
    } else {
      const std::uint64_t data_seed = derive_seed(replicate_seed(seed, r), streams::data);
      for (int i = 1; i <= n; ++i) {
        NeighborPair pair = make_neighbors(dist, n, i, data_seed, options.identical);
        CoupledRun run = coupled_run(obj, pair, schedule, scheme, T, draw.index_seed, copt);
        if (i == 1 || run.delta.back() > best.delta.back()) best = std::move(run);
      }
    }
    best.indices.clear();
    best.indices.shrink_to_fit();
    best.alphas.clear();
    best.alphas.shrink_to_fit();
    runs[static_cast<std::size_t>(r)] = std::move(best);
  });

  StabilityReport rep;
  rep.replicates = M;
  rep.mode = options.mode;
  rep.alphas = schedule_series(schedule, T);
  rep.t = runs.front().t;
  rep.path_certified = runs.front().path_certified;
  for (const auto& run : runs) {
    rep.path_violations += run.path_violations;
    rep.worst_path_slack = std::max(rep.worst_path_slack, run.worst_path_slack);
    rep.final_deltas.push_back(run.delta.back());
    rep.final_swa_deltas.push_back(run.delta_swa.back());
  }
  std::vector<double> column(static_cast<std::size_t>(M));
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    for (int r = 0; r < M; ++r) column[static_cast<std::size_t>(r)] = runs[static_cast<std::size_t>(r)].delta[k];
    double m = mean(column), h = ci95_half_width(column);
    rep.delta_mean.push_back(m);
    rep.delta_lo.push_back(m - h);
    rep.delta_hi.push_back(m + h);
    for (int r = 0; r < M; ++r) column[static_cast<std::size_t>(r)] = runs[static_cast<std::size_t>(r)].delta_swa[k];
    m = mean(column);
    h = ci95_half_width(column);
    rep.delta_swa_mean.push_back(m);
    rep.delta_swa_lo.push_back(m - h);
    rep.delta_swa_hi.push_back(m + h);
  }
  return rep;
}

ReferenceMinimizer reference_minimizer(const Objective& obj, const Dataset& S, int max_iterations, double tol) {
  require(!S.empty(), "reference_minimizer: empty dataset");
  require(max_iterations >= 1, "reference_minimizer: max_iterations must be >= 1");
  const ConstantsRecord& c = obj.constants();
  double base;
  if (c.beta > 0.0) {
    base = 1.0 / c.beta;
  } else {
    base = c.L > 0.0 ? 1.0 / c.L : 1.0;
  }
  const int constant_phase = c.eta > 0.0 || c.beta == 0.0 ? max_iterations / 10 : max_iterations;

  ReferenceMinimizer out;
  Vector theta = Vector::Zero(obj.param_dim());
  out.theta = theta;
  out.risk = empirical_risk(obj, S, theta);
  out.grad_norm = kInf;
  for (int k = 0; k < max_iterations; ++k) {
    Vector g = empirical_gradient(obj, S, theta);
    double gn = g.norm();
    double risk = empirical_risk(obj, S, theta);
    if (risk < out.risk || (risk == out.risk && gn < out.grad_norm)) {
      out.theta = theta;
      out.risk = risk;
      out.grad_norm = gn;
    }
    out.iterations = k;
    if (gn <= tol) {
      out.converged = true;
      break;
    }
    double step = k < constant_phase ? base : base / std::sqrt(static_cast<double>(k - constant_phase + 1));
    theta = project_ball(theta - step * g, obj.domain_radius());
  }
  return out;
}

GapEstimate estimate_gaps(const Objective& obj, const ExampleDistribution& dist, int n,
                          const ScheduleSpec& schedule, SamplingScheme scheme, int T, int M,
                          int N_test, std::uint64_t seed, const GapOptions& options) {
  require(N_test >= 1000, "estimate_gaps: N_test must be >= 1000");
  require(M >= 1, "estimate_gaps: M must be >= 1");
  require(n >= 1, "estimate_gaps: n must be >= 1");
  const bool want_opt = options.opt_gap && obj.convex();
  std::vector<double> gaps(static_cast<std::size_t>(M));
  std::vector<double> opt(static_cast<std::size_t>(M));
  RunOptions ropt;
  ropt.radius = options.radius;
  parallel_for(M, options.jobs, [&](int r) {
    ReplicateDraw draw = draw_replicate(dist, n, seed, r);
    TrajectoryRecord rec = run(obj, draw.pair.S, schedule, scheme, T, draw.index_seed, ropt);
    std::mt19937_64 test_rng(derive_seed(replicate_seed(seed, r), streams::test));
    Dataset test = dist.sample_many(N_test, test_rng);
    const double train = empirical_risk(obj, draw.pair.S, rec.final_theta);
    gaps[static_cast<std::size_t>(r)] = empirical_risk(obj, test, rec.final_theta) - train;
    if (want_opt) {
      ReferenceMinimizer ref = reference_minimizer(obj, draw.pair.S, 20000);
      opt[static_cast<std::size_t>(r)] = train - ref.risk;
    }
  });
  GapEstimate g;
  g.gen_gaps = gaps;
  g.gen_gap = mean(gaps);
  g.gen_gap_ci = ci95_half_width(gaps);
  g.test_sample_size = N_test;
  g.replicates = M;
  if (want_opt) {
    g.opt_gap = mean(opt);
  } else if (options.opt_gap) {
    g.opt_gap_note = "unavailable for non-convex families; use the convergence probe";
  }
  return g;
}

ConvergenceReport convergence_probe(const Objective& obj, const Dataset& S, SamplingScheme scheme, int T,
                                    int M, double tau, std::uint64_t seed, std::optional<double> sigma,
                                    int jobs) {
  require(!S.empty(), "convergence_probe: empty dataset");
  require(M >= 1, "convergence_probe: M must be >= 1");
  require(tau > 0.0 && tau < 1.0, "convergence_probe: tau must lie in (0, 1)");
  require(T >= 1, "convergence_probe: T must be >= 1");
  const ConstantsRecord& c = obj.constants();
  const double floor_T = std::pow(c.beta / (2.0 * (1.0 - tau)), 2.0);
  require(static_cast<double>(T) >= floor_T, "convergence_probe: T below (beta/(2(1-tau)))^2");
  if (sigma) require(*sigma >= 0.0, "convergence_probe: sigma must be >= 0");

  const double alpha = 1.0 / std::sqrt(static_cast<double>(T));
  const int n = static_cast<int>(S.size());
  struct Replicate {
    std::vector<double> sq;
    double sigma = 0.0;
    double best_risk = kInf;
  };
  std::vector<Replicate> reps(static_cast<std::size_t>(M));
  parallel_for(M, jobs, [&](int m) {
    Replicate& rep = reps[static_cast<std::size_t>(m)];
    rep.sq.resize(static_cast<std::size_t>(T) + 1);
    IndexStream stream(scheme, n, derive_seed(replicate_seed(seed, m), streams::index));
    Vector theta = Vector::Zero(obj.param_dim());
    std::vector<Vector> grads(static_cast<std::size_t>(n));
    for (int t = 0; t <= T; ++t) {
      Vector full = Vector::Zero(obj.param_dim());
      double risk = 0.0;
      for (int i = 0; i < n; ++i) {
        grads[static_cast<std::size_t>(i)] = obj.subgradient(theta, S[static_cast<std::size_t>(i)]);
        full += grads[static_cast<std::size_t>(i)];
        risk += obj.value(theta, S[static_cast<std::size_t>(i)]);
      }
      full /= n;
      rep.best_risk = std::min(rep.best_risk, risk / n);
      rep.sq[static_cast<std::size_t>(t)] = full.squaredNorm();
      for (const auto& g : grads) rep.sigma = std::max(rep.sigma, (g - full).norm());
      if (t == T) break;
      int index = stream.next();
      const Vector& d = index < 0 ? full : grads[static_cast<std::size_t>(index)];
      theta = project_ball(theta - alpha * d, obj.domain_radius());
    }
  });

  ConvergenceReport out;
  out.T = T;
  out.replicates = M;
  out.tau = tau;
  out.alpha = alpha;
  out.eta = c.eta;
  out.beta = c.beta;
  out.min_mean_sq_grad = kInf;
  for (int t = 0; t <= T; ++t) {
    double s = 0.0;
    for (const auto& rep : reps) s += rep.sq[static_cast<std::size_t>(t)];
    s /= M;
    if (s < out.min_mean_sq_grad) {
      out.min_mean_sq_grad = s;
      out.t_min = t;
    }
  }
  double measured_sigma = 0.0;
  double best_seen = kInf;
  for (const auto& rep : reps) {
    measured_sigma = std::max(measured_sigma, rep.sigma);
    best_seen = std::min(best_seen, rep.best_risk);
  }
  out.sigma = sigma.value_or(measured_sigma);
  out.sigma_estimated = !sigma.has_value();
  const Vector theta0 = Vector::Zero(obj.param_dim());
  const double start = empirical_risk(obj, S, theta0);
  ReferenceMinimizer ref = reference_minimizer(obj, S, 20000);
  out.D = std::max(start - std::min(ref.risk, best_seen), 0.0);
  out.D_nonnegative_loss = start;
  out.bound = convergence_bound(out.eta, tau, out.sigma, out.D, out.beta, T);
  out.within_bound = out.min_mean_sq_grad <= out.bound;
  return out;
}

Vector hard_instance_closed_form(const HardInstanceParams& p, int n, double alpha, int t) {
  require(n >= 1 && t >= 0 && t <= p.horizon, "hard_instance_closed_form: need n >= 1 and 0 <= t <= horizon");
  Vector theta = Vector::Zero(p.d);
  for (int j = 0; j < p.horizon; ++j) theta[j] = t * alpha / (n * p.K);
  const double drop = alpha * p.eta * (n - 1) / n;
  for (int s = 1; s < t; ++s) theta[s - 1] -= drop;
  return theta;
}

BoundOverlay bound_overlay(const ConstantsRecord& c, bool convex, int n, const ScheduleSpec& schedule,
                           const std::vector<int>& t, const std::vector<double>& alphas) {
  BoundOverlay o;
  std::vector<double> prefix(alphas.size() + 1, 0.0);
  for (std::size_t k = 0; k < alphas.size(); ++k) prefix[k + 1] = prefix[k] + alphas[k];
  const bool fixed = schedule.kind == ScheduleKind::fixed && !schedule.cap;
  for (int step : t) {
    double s = prefix[static_cast<std::size_t>(step)];
    if (convex && c.L > 0.0) {
      o.ub_convex.push_back(ub_convex(c.L, c.eta, n, s) / c.L);
      o.ub_swa.push_back(ub_swa(c.L, c.eta, n, s) / c.L);
    } else {
      o.ub_convex.push_back(kNaN);
      o.ub_swa.push_back(kNaN);
    }
    o.lb.push_back(fixed ? lb_uas(c.eta, c.L, schedule.alpha, step, n) : kNaN);
  }
  return o;
}

void write_stability_csv(const StabilityReport& r, const BoundOverlay& o, const std::optional<GapEstimate>& gap,
                         std::ostream& out) {
  require(o.ub_convex.size() == r.t.size(), "stability csv: overlay length mismatch");
  out << "t,delta_mean,delta_lo,delta_hi,delta_swa_mean,ub_convex,ub_swa,lb,gen_gap,gen_gap_ci\n";
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const bool last = k + 1 == r.t.size();
    out << r.t[k] << ',' << fmt_double(r.delta_mean[k]) << ',' << fmt_double(r.delta_lo[k]) << ','
        << fmt_double(r.delta_hi[k]) << ',' << fmt_double(r.delta_swa_mean[k]) << ','
        << fmt_double(o.ub_convex[k]) << ',' << fmt_double(o.ub_swa[k]) << ',' << fmt_double(o.lb[k]) << ','
        << fmt_double(last && gap ? gap->gen_gap : kNaN) << ','
        << fmt_double(last && gap ? gap->gen_gap_ci : kNaN) << '\n';
  }
}

nlohmann::json to_json(const StabilityReport& r) {
  return {{"replicates", r.replicates},
          {"mode", r.mode == UasMode::randomized ? "randomized" : "worst_case"},
          {"T", r.t.empty() ? 0 : r.t.back()},
          {"sum_alpha", sum_of(r.alphas)},
          {"delta_T_mean", r.delta_mean.back()},
          {"delta_T_ci", r.delta_hi.back() - r.delta_mean.back()},
          {"delta_swa_T_mean", r.delta_swa_mean.back()},
          {"delta_swa_T_ci", r.delta_swa_hi.back() - r.delta_swa_mean.back()},
          {"path_certificate",
           {{"applicable", r.path_certified},
            {"violations", r.path_violations},
            {"passed", !r.path_certified || r.path_violations == 0},
            {"worst_slack", std::isfinite(r.worst_path_slack) ? nlohmann::json(r.worst_path_slack)
                                                              : nlohmann::json(nullptr)}}}};
}

nlohmann::json to_json(const GapEstimate& g) {
  nlohmann::json j = {{"gen_gap", g.gen_gap},
                      {"gen_gap_ci", g.gen_gap_ci},
                      {"test_sample_size", g.test_sample_size},
                      {"replicates", g.replicates}};
  j["opt_gap"] = g.opt_gap ? nlohmann::json(*g.opt_gap) : nlohmann::json(nullptr);
  if (!g.opt_gap_note.empty()) j["opt_gap_note"] = g.opt_gap_note;
  return j;
}

nlohmann::json to_json(const ConvergenceReport& r) {
  return {{"min_mean_sq_grad", r.min_mean_sq_grad},
          {"t_min", r.t_min},
          {"sigma", r.sigma},
          {"sigma_estimated", r.sigma_estimated},
          {"D", r.D},
          {"D_nonnegative_loss", r.D_nonnegative_loss},
          {"eta", r.eta},
          {"beta", r.beta},
          {"tau", r.tau},
          {"alpha", r.alpha},
          {"T", r.T},
          {"replicates", r.replicates},
          {"bound", r.bound},
          {"within_bound", r.within_bound}};
}

}  // namespace stablab
