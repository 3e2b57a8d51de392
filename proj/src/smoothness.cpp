#include "stablab/smoothness.hpp"
#include "stablab/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace stablab {

namespace {

constexpr std::array<double, 3> kStraddleWidths = {1e-3, 1e-2, 1e-1};
constexpr int kKinkAttempts = 8;

nlohmann::json vec_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

double SamplerSpec::resolved_radius(const Objective& obj) const {
  double r = radius.value_or(std::isfinite(obj.domain_radius()) ? obj.domain_radius() : 1.0);
  require(r > 0.0 && r <= obj.domain_radius(), "sampler radius must lie in (0, R]");
  return r;
}

PairSampler::PairSampler(const Objective& obj, std::uint64_t seed, SamplerSpec spec)
    : obj_(obj), spec_(spec), radius_(spec.resolved_radius(obj)), rng_(seed) {
  require(spec_.kink_fraction >= 0.0 && spec_.kink_fraction <= 1.0,
          "kink_fraction must lie in [0, 1]");
}

SamplePair PairSampler::next() {
  const std::uint64_t k = index_++;
  const double f = spec_.kink_fraction;
  const bool want_kink = std::floor(static_cast<double>(k + 1) * f) > std::floor(static_cast<double>(k) * f);
  const int d = obj_.param_dim();

  SamplePair pair;
  pair.z = obj_.sample_example(rng_);
  if (want_kink) {
    const double width = kStraddleWidths[k % kStraddleWidths.size()];
    // Keep both endpoints inside the ball.
    const double inner = std::max(radius_ - 0.5 * kStraddleWidths.back(), 0.5 * radius_);
    for (int attempt = 0; attempt < kKinkAttempts; ++attempt) {
      if (attempt > 0) pair.z = obj_.sample_example(rng_);
      auto probe = obj_.sample_kink(pair.z, inner, rng_);
      if (!probe) continue;
      pair.theta1 = probe->point + 0.5 * width * probe->direction;
      pair.theta2 = probe->point - 0.5 * width * probe->direction;
      if (obj_.in_domain(pair.theta1) && obj_.in_domain(pair.theta2)) {
        pair.straddles = true;
        return pair;
      }
    }
  }
  pair.theta1 = uniform_in_ball(d, radius_, rng_);
  pair.theta2 = uniform_in_ball(d, radius_, rng_);
  return pair;
}

SmoothnessCertificate estimate_constants(const Objective& obj, int N, std::uint64_t seed,
                                         const SamplerSpec& spec, BetaPolicy policy) {
  require(N >= 2, "estimate_constants: N must be >= 2");
  PairSampler sampler(obj, seed, spec);

  struct Sample {
    double dtheta;
    double dgrad;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(N));
  double L_hat = 0.0;
  for (int k = 0; k < N; ++k) {
    SamplePair p = sampler.next();
    double dtheta = (p.theta1 - p.theta2).norm();
    if (dtheta == 0.0) continue;
    double dvalue = std::abs(obj.value(p.theta1, p.z) - obj.value(p.theta2, p.z));
    double dgrad = (obj.subgradient(p.theta1, p.z) - obj.subgradient(p.theta2, p.z)).norm();
    L_hat = std::max(L_hat, dvalue / dtheta);
    samples.push_back({dtheta, dgrad});
  }

  auto eta_for = [&](double beta) {
    double eta = 0.0;
    for (const auto& s : samples) eta = std::max(eta, s.dgrad - beta * s.dtheta);
    return eta;
  };

  SmoothnessCertificate cert;
  cert.N = N;
  cert.radius = spec.resolved_radius(obj);
  cert.kink_fraction = spec.kink_fraction;
  cert.seed = seed;
  cert.L_hat = L_hat;
  const bool analytic = obj.constants().provenance == Provenance::analytic;
  if (policy == BetaPolicy::analytic_if_available && analytic) {
    cert.beta_fixed = true;
    cert.beta_hat = obj.constants().beta;
    cert.eta_hat = eta_for(cert.beta_hat);
  } else {
    double beta_max = 0.0;
    for (const auto& s : samples) beta_max = std::max(beta_max, s.dgrad / s.dtheta);
    constexpr int kGrid = 16;
    constexpr double kReferenceDistance = 0.1;
    double best_score = kInf;
    for (int g = 0; g <= kGrid; ++g) {
      double beta = beta_max * g / kGrid;
      double eta = eta_for(beta);
      double score = eta + beta * kReferenceDistance;
      if (score < best_score) {
        best_score = score;
        cert.beta_hat = beta;
        cert.eta_hat = eta;
      }
    }
  }
  // Largest residual of the gradient inequality at the reported (β, η); ≤ 0 by construction.
  double worst = -kInf;
  for (const auto& s : samples) worst = std::max(worst, s.dgrad - cert.beta_hat * s.dtheta - cert.eta_hat);
  cert.max_violation = samples.empty() ? 0.0 : std::max(worst, 0.0);
  return cert;
}

ConstantsRecord certified_constants(const Objective& obj, int N, std::uint64_t seed,
                                    const SamplerSpec& spec) {
  SmoothnessCertificate cert = estimate_constants(obj, N, seed, spec, BetaPolicy::fit);
  ConstantsRecord c = obj.constants();
  c.L = cert.L_hat;
  c.beta = cert.beta_hat;
  c.eta = cert.eta_hat;
  c.provenance = Provenance::estimated;
  return c;
}

std::string to_string(PropertyId id) {
  switch (id) {
    case PropertyId::descent: return "descent";
    case PropertyId::cocoercive: return "cocoercive";
    case PropertyId::expansive_general: return "expansive_general";
    case PropertyId::expansive_convex: return "expansive_convex";
    case PropertyId::contractive_strongly: return "contractive_strongly";
  }
  return "unknown";
}

ExpansionMode expansion_mode_from_string(const std::string& name) {
  if (name == "general") return ExpansionMode::general;
  if (name == "convex") return ExpansionMode::convex;
  if (name == "strongly") return ExpansionMode::strongly;
  throw InvalidInput("unknown expansiveness mode '" + name + "'");
}

double property_slack(const Objective& obj, const PropertyReport& r, const Vector& theta1,
                      const Vector& theta2, const Example& z) {
  const Vector delta = theta1 - theta2;
  const double dn = delta.norm();
  const Vector g1 = obj.subgradient(theta1, z);
  const Vector g2 = obj.subgradient(theta2, z);
  switch (r.property) {
    case PropertyId::descent: {
      double lhs = obj.value(theta1, z) - obj.value(theta2, z);
      double rhs = g2.dot(delta) + 0.5 * r.beta * dn * dn + r.eta * dn;
      return lhs - rhs;
    }
    case PropertyId::cocoercive: {
      const Vector dg = g1 - g2;
      double excess = std::max(dg.norm() - r.eta, 0.0);
      double rhs;
      if (r.beta > 0.0) {
        rhs = excess * excess / r.beta;
      } else {
        rhs = excess > 0.0 ? kInf : 0.0;
      }
      return rhs - dg.dot(delta);
    }
    case PropertyId::expansive_general:
    case PropertyId::expansive_convex:
    case PropertyId::contractive_strongly: {
      double factor = 1.0;
      if (r.property == PropertyId::expansive_general) factor = 1.0 + r.alpha * r.beta;
      if (r.property == PropertyId::contractive_strongly) factor = 1.0 - r.alpha * r.gamma;
      double lhs = (delta - r.alpha * (g1 - g2)).norm();
      return lhs - (factor * dn + r.alpha * r.eta);
    }
  }
  return 0.0;
}

namespace {

PropertyReport run_property(const Objective& obj, PropertyReport report, int N, std::uint64_t seed,
                            const SamplerSpec& spec) {
  require(N >= 1, "property check: N must be >= 1");
  PairSampler sampler(obj, seed, spec);
  for (int k = 0; k < N; ++k) {
    SamplePair p = sampler.next();
    double slack = property_slack(obj, report, p.theta1, p.theta2, p.z);
    report.worst_slack = std::max(report.worst_slack, slack);
    if (slack > report.tolerance) {
      ++report.violation_count;
      if (report.violations.size() < kMaxStoredViolations) {
        report.violations.push_back({p.theta1, p.theta2, p.z, slack});
      }
    }
  }
  report.pairs_tested = N;
  return report;
}

}  // namespace

PropertyReport check_descent(const Objective& obj, double beta, double eta, int N,
                             std::uint64_t seed, const SamplerSpec& spec) {
  require(beta >= 0.0 && eta >= 0.0, "check_descent: beta and eta must be >= 0");
  PropertyReport r;
  r.property = PropertyId::descent;
  r.beta = beta;
  r.eta = eta;
  return run_property(obj, r, N, seed, spec);
}

PropertyReport check_cocoercive(const Objective& obj, double beta, double eta, int N,
                                std::uint64_t seed, const SamplerSpec& spec) {
  if (!obj.convex()) throw Unsupported("check_cocoercive: " + to_string(obj.family()) + " is not convex");
  require(beta >= 0.0 && eta >= 0.0, "check_cocoercive: beta and eta must be >= 0");
  PropertyReport r;
  r.property = PropertyId::cocoercive;
  r.beta = beta;
  r.eta = eta;
  return run_property(obj, r, N, seed, spec);
}

PropertyReport check_update_expansiveness(const Objective& obj, double alpha, ExpansionMode mode,
                                          int N, std::uint64_t seed, const LemmaConstants& constants,
                                          const SamplerSpec& spec) {
  require(alpha >= 0.0, "check_update_expansiveness: alpha must be >= 0");
  PropertyReport r;
  r.alpha = alpha;
  r.beta = constants.beta.value_or(obj.constants().beta);
  r.eta = constants.eta.value_or(obj.constants().eta);
  switch (mode) {
    case ExpansionMode::general: r.property = PropertyId::expansive_general; break;
    case ExpansionMode::convex: r.property = PropertyId::expansive_convex; break;
    case ExpansionMode::strongly: r.property = PropertyId::contractive_strongly; break;
  }
  if (mode != ExpansionMode::general) {
    require(alpha * r.beta <= 1.0 + 1e-12, "check_update_expansiveness: alpha must be <= 1/beta");
  }
  if (mode == ExpansionMode::strongly) {
    auto gamma = constants.gamma ? constants.gamma : obj.constants().gamma;
    require(gamma.has_value() && *gamma > 0.0, "check_update_expansiveness: strongly mode needs gamma");
    r.gamma = *gamma;
  }
  return run_property(obj, r, N, seed, spec);
}

nlohmann::json to_json(const SmoothnessCertificate& c) {
  return {{"L_hat", c.L_hat},
          {"beta_hat", c.beta_hat},
          {"eta_hat", c.eta_hat},
          {"N", c.N},
          {"sampler", {{"radius", c.radius},
                       {"distribution", "uniform_ball+kink_straddle"},
                       {"kink_fraction", c.kink_fraction},
                       {"seed", c.seed}}},
          {"beta_fixed", c.beta_fixed},
          {"max_violation", c.max_violation}};
}

nlohmann::json to_json(const PropertyReport& r) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"theta1", vec_json(v.theta1)},
                          {"theta2", vec_json(v.theta2)},
                          {"z", vec_json(v.z)},
                          {"slack", v.slack}});
  }
  return {{"property", to_string(r.property)},
          {"pairs_tested", r.pairs_tested},
          {"violation_count", r.violation_count},
          {"violations", violations},
          {"worst_slack", r.worst_slack},
          {"tolerance", r.tolerance},
          {"passed", r.passed()},
          {"constants", {{"beta", r.beta}, {"eta", r.eta}, {"alpha", r.alpha}, {"gamma", r.gamma}}}};
}

}  // namespace stablab
