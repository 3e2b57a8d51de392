#pragma once

#include "stablab/core.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>

namespace stablab {

enum class FamilyId { shift_quadratic, logistic, tanh_regression, hard_instance };
enum class InnerSolver { closed_form, endpoint_enumeration, pgd };
enum class Provenance { analytic, estimated };

std::string to_string(FamilyId family);
std::string to_string(InnerSolver solver);
std::string to_string(Provenance provenance);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Perturbation set of the adversarial surrogate h(θ,z) = max_{‖z'−z‖_p ≤ ε} g(θ,z').
struct AdversarialConfig {
  double epsilon = 0.0;
  double p = kInf;  // 2 or ∞
  InnerSolver solver = InnerSolver::closed_form;
  int pgd_steps = 10;
  std::optional<double> pgd_step_size;  // ε/4 when unset
  double delta_epsilon = 0.0;           // declared attack sub-optimality, bounds only

  double step_size() const { return pgd_step_size.value_or(epsilon / 4.0); }
  void validate() const;
};

struct ConstantsRecord {
  double L = 0.0;
  double L_theta = 0.0;
  double L_z = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  std::optional<double> gamma;
  std::optional<double> B;
  Provenance provenance = Provenance::analytic;
};

struct InnerResult {
  Example maximizer;
  double attained = 0.0;
};

/// A point on a nonsmooth locus of h(·,z) and a unit direction that crosses it.
struct KinkProbe {
  Vector point;
  Vector direction;
};

/// Loss family h(θ,z) restricted to the ball ‖θ‖ ≤ R. Immutable once built.
///
/// Adversarial families evaluate the inner maximum with the configured solver and
/// return the Danskin direction ∇_θ g(θ, z*) as subgradient. Ties in the inner max
/// resolve to the lowest-index candidate, where the endpoint z−ε precedes z+ε in
/// every coordinate.
class Objective {
 public:
  virtual ~Objective() = default;
  Objective(const Objective&) = delete;
  Objective& operator=(const Objective&) = delete;

  FamilyId family() const noexcept { return family_; }
  int param_dim() const noexcept { return param_dim_; }
  int example_dim() const noexcept { return example_dim_; }
  double domain_radius() const noexcept { return radius_; }
  double ridge() const noexcept { return ridge_; }
  bool convex() const noexcept { return convex_; }
  const ConstantsRecord& constants() const noexcept { return constants_; }
  const std::optional<AdversarialConfig>& adversarial() const noexcept { return adversarial_; }
  bool is_adversarial() const noexcept { return adversarial_.has_value() && adversarial_->epsilon > 0.0; }

  bool in_domain(const Vector& theta) const;
  virtual bool in_example_space(const Example& z) const = 0;

  double value(const Vector& theta, const Example& z) const;
  Vector subgradient(const Vector& theta, const Example& z) const;
  InnerResult inner_maximize(const Vector& theta, const Example& z) const;

  /// Uniform draw from the example space; used by the smoothness sampler.
  virtual Example sample_example(std::mt19937_64& rng) const = 0;
  /// Point on a nonsmooth locus of h(·,z) within `radius`, if the family knows one.
  virtual std::optional<KinkProbe> sample_kink(const Example& z, double radius,
                                               std::mt19937_64& rng) const;

  /// Configuration echo, accepted back by make_objective.
  virtual nlohmann::json to_json() const = 0;

 protected:
  Objective(FamilyId family, int param_dim, int example_dim, double radius,
            std::optional<AdversarialConfig> adversarial, double ridge, bool convex);

  void set_constants(const ConstantsRecord& constants) { constants_ = constants; }

  // Smooth base loss g and its derivatives.
  virtual double base_value(const Vector& theta, const Example& z) const = 0;
  virtual Vector base_grad_theta(const Vector& theta, const Example& z) const = 0;
  /// Gradient of g with respect to the perturbable leading coordinates of z.
  virtual Vector base_grad_perturbable(const Vector& theta, const Example& z) const = 0;
  virtual int perturbable_dim() const { return example_dim_; }
  virtual std::optional<Example> closed_form_maximizer(const Vector& theta,
                                                       const Example& z) const;
  /// True when g is convex in the perturbable coordinates, so box corners hold the max.
  virtual bool enumeration_exact() const { return false; }

  // Unregularized h; the hard instance overrides these directly.
  virtual double raw_value(const Vector& theta, const Example& z) const;
  virtual Vector raw_subgradient(const Vector& theta, const Example& z) const;

  nlohmann::json common_json() const;

 private:
  void check_args(const Vector& theta, const Example& z) const;
  Example solve_inner(const Vector& theta, const Example& z) const;
  Example enumerate_corners(const Vector& theta, const Example& z) const;
  Example run_pgd(const Vector& theta, const Example& z) const;

  FamilyId family_;
  int param_dim_;
  int example_dim_;
  double radius_;
  std::optional<AdversarialConfig> adversarial_;
  double ridge_;
  bool convex_;
  ConstantsRecord constants_;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// g(θ,z) = ½‖θ−z‖² with z ∈ ℝ^d, ‖z‖ ≤ example_radius.
struct ShiftQuadraticParams {
  int dim = 1;
  double domain_radius = 10.0;
  double example_radius = 1.0;
  double ridge = 0.0;
  std::optional<AdversarialConfig> adversarial;
};

/// g(θ,(x,y)) = log(1 + exp(−y θᵀx)), ‖x‖ ≤ feature_radius, y ∈ {−1,+1}; only x is perturbed.
struct LogisticParams {
  int dim = 2;
  double domain_radius = 2.0;
  double feature_radius = 1.0;
  double ridge = 0.0;
  std::optional<AdversarialConfig> adversarial;
};

/// g(θ,(x,y)) = (tanh(θᵀx) − y)², ‖x‖ ≤ feature_radius, y ∈ [−1,1]; bounded by 4, non-convex.
struct TanhRegressionParams {
  int dim = 2;
  double domain_radius = 3.0;
  double feature_radius = 1.0;
  std::optional<AdversarialConfig> adversarial;
};

/// Lower-bound construction: h(θ,0) = η·max{0, θ_1−v, …, θ_T−v}, h(θ,1) = ⟨r,θ⟩/K.
struct HardInstanceParams {
  int d = 2;
  int horizon = 2;
  double v = 0.0;
  double K = 1.0;
  double eta = 1.0;
};

ObjectivePtr make_shift_quadratic(const ShiftQuadraticParams& params);
ObjectivePtr make_logistic(const LogisticParams& params);
ObjectivePtr make_tanh_regression(const TanhRegressionParams& params);
ObjectivePtr make_hard_instance_objective(const HardInstanceParams& params);

/// Builds an objective from {"family": ..., parameters...}; unknown keys are rejected.
ObjectivePtr make_objective(const nlohmann::json& config);
HardInstanceParams hard_instance_params_from_json(const nlohmann::json& config);

nlohmann::json to_json(const ConstantsRecord& constants);
nlohmann::json to_json(const AdversarialConfig& config);
AdversarialConfig adversarial_from_json(const nlohmann::json& config);

/// Lipschitz factor c_p with ‖u‖₂ ≤ c_p‖u‖_p on ℝ^k (p ∈ {2, ∞}).
double norm_conversion(double p, int k);

}  // namespace stablab
