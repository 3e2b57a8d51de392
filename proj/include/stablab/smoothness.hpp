#pragma once

#include "stablab/core.hpp"
#include "stablab/objective.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stablab {

/// Pair sampler. A fraction of the pairs straddle a nonsmooth locus of h(·,z) at
/// separation δ ∈ {1e-3, 1e-2, 1e-1}; the rest are uniform in the θ-ball.
struct SamplerSpec {
  std::optional<double> radius;  // defaults to the domain radius, or 1 for unbounded domains
  double kink_fraction = 0.5;

  double resolved_radius(const Objective& obj) const;
};

struct SamplePair {
  Vector theta1;
  Vector theta2;
  Example z;
  bool straddles = false;
};

/// Deterministic stream of pairs; pair k does not depend on how many pairs follow it.
class PairSampler {
 public:
  PairSampler(const Objective& obj, std::uint64_t seed, SamplerSpec spec = {});
  SamplePair next();

 private:
  const Objective& obj_;
  SamplerSpec spec_;
  double radius_;
  std::mt19937_64 rng_;
  std::uint64_t index_ = 0;
};

struct SmoothnessCertificate {
  double L_hat = 0.0;
  double beta_hat = 0.0;
  double eta_hat = 0.0;
  int N = 0;
  double radius = 0.0;
  double kink_fraction = 0.0;
  std::uint64_t seed = 0;
  bool beta_fixed = false;  // beta_hat taken from the analytic constants
  double max_violation = 0.0;
};

enum class BetaPolicy { analytic_if_available, fit };

/// Estimates (L, β, η) from N sampled pairs. With an analytic β, η-hat is the largest
/// ‖Δ∇h‖ − β‖Δθ‖ (floored at 0). Otherwise β is chosen from the grid β_max·k/16,
/// k = 0..16, minimizing η(β) + β·0.1 (η alone always favors the largest β).
SmoothnessCertificate estimate_constants(const Objective& obj, int N, std::uint64_t seed,
                                         const SamplerSpec& spec = {},
                                         BetaPolicy policy = BetaPolicy::analytic_if_available);

/// ConstantsRecord built from a certificate (provenance = estimated).
ConstantsRecord certified_constants(const Objective& obj, int N, std::uint64_t seed,
                                    const SamplerSpec& spec = {});

enum class PropertyId { descent, cocoercive, expansive_general, expansive_convex, contractive_strongly };
enum class ExpansionMode { general, convex, strongly };

std::string to_string(PropertyId id);
ExpansionMode expansion_mode_from_string(const std::string& name);

inline constexpr double kPropertyTolerance = 1e-9;

struct Violation {
  Vector theta1;
  Vector theta2;
  Example z;
  double slack = 0.0;  // lhs − rhs of the asserted inequality
};

struct PropertyReport {
  PropertyId property = PropertyId::descent;
  int pairs_tested = 0;
  int violation_count = 0;
  std::vector<Violation> violations;  // the first kMaxStoredViolations
  double worst_slack = -kInf;
  double tolerance = kPropertyTolerance;
  // Constants the inequality was checked with.
  double beta = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  bool passed() const { return violation_count == 0; }
};

inline constexpr std::size_t kMaxStoredViolations = 64;

/// Overrides for the lemma constants; unset fields fall back to the objective's record.
struct LemmaConstants {
  std::optional<double> beta;
  std::optional<double> eta;
  std::optional<double> gamma;
};

PropertyReport check_descent(const Objective& obj, double beta, double eta, int N,
                             std::uint64_t seed, const SamplerSpec& spec = {});
/// Throws Unsupported for non-convex families.
PropertyReport check_cocoercive(const Objective& obj, double beta, double eta, int N,
                                std::uint64_t seed, const SamplerSpec& spec = {});
/// Convex and strongly modes require α ≤ 1/β; strongly mode requires γ.
PropertyReport check_update_expansiveness(const Objective& obj, double alpha, ExpansionMode mode,
                                          int N, std::uint64_t seed, const LemmaConstants& constants = {},
                                          const SamplerSpec& spec = {});

/// Re-evaluates the slack of a stored violation (or any pair) under the report's constants.
double property_slack(const Objective& obj, const PropertyReport& report, const Vector& theta1,
                      const Vector& theta2, const Example& z);

nlohmann::json to_json(const SmoothnessCertificate& certificate);
nlohmann::json to_json(const PropertyReport& report);

}  // namespace stablab
