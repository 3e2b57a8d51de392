#include "stablab/json_util.hpp"
#include "stablab/objective.hpp"
#include "stablab/sampling.hpp"

#include <cmath>

namespace stablab {
namespace {

constexpr double kTol = 1e-12;

// sup_u |d/du (tanh u − y)²| over y ∈ [−1,1] is 64/27 (attained at |tanh u| = 1/3).
constexpr double kTanhSlope = 64.0 / 27.0;
// sup_{u, y ∈ [−1,1]} |d²/du² (tanh u − y)²| ≈ 2.4649, rounded up.
constexpr double kTanhCurvature = 2.47;

double softplus(double a) { return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }
double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  double e = std::exp(a);
  return e / (1.0 + e);
}

double effective_epsilon(const std::optional<AdversarialConfig>& adv, int k) {
  if (!adv) return 0.0;
  return adv->epsilon * norm_conversion(adv->p, k);
}

double adv_p(const std::optional<AdversarialConfig>& adv) { return adv ? adv->p : kInf; }

// --------------------------------------------------------------------------------------------

class ShiftQuadratic final : public Objective {
 public:
  explicit ShiftQuadratic(const ShiftQuadraticParams& p)
      : Objective(FamilyId::shift_quadratic, p.dim, p.dim, p.domain_radius, p.adversarial,
                  p.ridge, true),
        example_radius_(p.example_radius) {
    require(p.example_radius > 0.0, "example_radius must be positive");
    const double eps = adversarial() ? adversarial()->epsilon : 0.0;
    const double reach = p.domain_radius + p.example_radius + effective_epsilon(p.adversarial, p.dim);
    ConstantsRecord c;
    c.L = reach + p.ridge * p.domain_radius;
    c.L_theta = 1.0;
    c.L_z = norm_conversion(adv_p(p.adversarial), p.dim);
    c.beta = 1.0 + p.ridge;
    c.eta = 2.0 * c.L_z * eps;
    c.gamma = 1.0 + p.ridge;
    c.B = 0.5 * reach * reach + 0.5 * p.ridge * p.domain_radius * p.domain_radius;
    set_constants(c);
  }

  bool in_example_space(const Example& z) const override {
    return z.allFinite() && z.norm() <= example_radius_ * (1.0 + kTol) + kTol;
  }

  Example sample_example(std::mt19937_64& rng) const override {
    return uniform_in_ball(example_dim(), example_radius_, rng);
  }

  std::optional<KinkProbe> sample_kink(const Example& z, double radius,
                                       std::mt19937_64& rng) const override {
    if (!is_adversarial()) return std::nullopt;
    const int d = param_dim();
    if (d == 1 || adversarial()->p == 2.0) {
      if (z.norm() >= radius) return std::nullopt;
      return KinkProbe{z, random_unit(d, rng)};
    }
    // Under p = ∞ every coordinate with θ_j = z_j is a kink.
    std::uniform_int_distribution<int> pick(0, d - 1);
    for (int attempt = 0; attempt < 32; ++attempt) {
      Vector point = uniform_in_ball(d, radius, rng);
      int j = pick(rng);
      point[j] = z[j];
      if (point.norm() < radius) return KinkProbe{point, Vector::Unit(d, j)};
    }
    return std::nullopt;
  }

  nlohmann::json to_json() const override {
    auto j = common_json();
    j["example_radius"] = example_radius_;
    j["ridge"] = ridge();
    return j;
  }

 protected:
  double base_value(const Vector& theta, const Example& z) const override {
    return 0.5 * (theta - z).squaredNorm();
  }
  Vector base_grad_theta(const Vector& theta, const Example& z) const override { return theta - z; }
  Vector base_grad_perturbable(const Vector& theta, const Example& z) const override {
    return z - theta;
  }
  bool enumeration_exact() const override { return true; }

  std::optional<Example> closed_form_maximizer(const Vector& theta, const Example& z) const override {
    const AdversarialConfig& adv = *adversarial();
    Example best = z;
    if (param_dim() == 1 || std::isinf(adv.p)) {
      // Farthest endpoint per coordinate; θ_j = z_j ties resolve to z_j − ε.
      for (int j = 0; j < param_dim(); ++j) {
        best[j] = theta[j] >= z[j] ? z[j] - adv.epsilon : z[j] + adv.epsilon;
      }
      return best;
    }
    Vector u = theta - z;
    double un = u.norm();
    if (un == 0.0) {
      best[0] -= adv.epsilon;
    } else {
      best -= (adv.epsilon / un) * u;
    }
    return best;
  }

 private:
  double example_radius_;
};

// --------------------------------------------------------------------------------------------

class Logistic final : public Objective {
 public:
  explicit Logistic(const LogisticParams& p)
      : Objective(FamilyId::logistic, p.dim, p.dim + 1, p.domain_radius, p.adversarial, p.ridge,
                  true),
        feature_radius_(p.feature_radius) {
    require(p.feature_radius > 0.0, "feature_radius must be positive");
    const double eps = adversarial() ? adversarial()->epsilon : 0.0;
    const double reach = p.feature_radius + effective_epsilon(p.adversarial, p.dim);
    ConstantsRecord c;
    c.L = reach + p.ridge * p.domain_radius;
    c.L_theta = 0.25 * reach * reach;
    c.L_z = norm_conversion(adv_p(p.adversarial), p.dim) * (1.0 + 0.25 * reach * p.domain_radius);
    c.beta = c.L_theta + p.ridge;
    c.eta = 2.0 * c.L_z * eps;
    if (p.ridge > 0.0) c.gamma = p.ridge;
    c.B = softplus(p.domain_radius * reach) + 0.5 * p.ridge * p.domain_radius * p.domain_radius;
    set_constants(c);
  }

  bool in_example_space(const Example& z) const override {
    const int d = param_dim();
    double y = z[d];
    return z.allFinite() && (y == 1.0 || y == -1.0) &&
           z.head(d).norm() <= feature_radius_ * (1.0 + kTol) + kTol;
  }

  Example sample_example(std::mt19937_64& rng) const override {
    const int d = param_dim();
    Example z(d + 1);
    z.head(d) = uniform_in_ball(d, feature_radius_, rng);
    z[d] = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    return z;
  }

  std::optional<KinkProbe> sample_kink(const Example&, double radius,
                                       std::mt19937_64& rng) const override {
    if (!is_adversarial()) return std::nullopt;
    const int d = param_dim();
    if (d == 1 || adversarial()->p == 2.0) return KinkProbe{Vector::Zero(d), random_unit(d, rng)};
    std::uniform_int_distribution<int> pick(0, d - 1);
    Vector point = uniform_in_ball(d, radius, rng);
    int j = pick(rng);
    point[j] = 0.0;
    return KinkProbe{point, Vector::Unit(d, j)};
  }

  nlohmann::json to_json() const override {
    auto j = common_json();
    j["feature_radius"] = feature_radius_;
    j["ridge"] = ridge();
    return j;
  }

 protected:
  int perturbable_dim() const override { return param_dim(); }

  double base_value(const Vector& theta, const Example& z) const override {
    const int d = param_dim();
    return softplus(-z[d] * theta.dot(z.head(d)));
  }
  Vector base_grad_theta(const Vector& theta, const Example& z) const override {
    const int d = param_dim();
    double y = z[d];
    return (-y * sigmoid(-y * theta.dot(z.head(d)))) * z.head(d);
  }
  Vector base_grad_perturbable(const Vector& theta, const Example& z) const override {
    const int d = param_dim();
    double y = z[d];
    return (-y * sigmoid(-y * theta.dot(z.head(d)))) * theta;
  }
  bool enumeration_exact() const override { return true; }

  std::optional<Example> closed_form_maximizer(const Vector& theta, const Example& z) const override {
    // max over x' of −yθᵀx': push x against yθ. Flat coordinates (θ_j = 0) take x_j − ε.
    const AdversarialConfig& adv = *adversarial();
    const int d = param_dim();
    const double y = z[d];
    Example best = z;
    if (d == 1 || std::isinf(adv.p)) {
      for (int j = 0; j < d; ++j) {
        best[j] = y * theta[j] >= 0.0 ? z[j] - adv.epsilon : z[j] + adv.epsilon;
      }
      return best;
    }
    double tn = theta.norm();
    if (tn == 0.0) {
      best[0] -= adv.epsilon;
    } else {
      best.head(d) -= (y * adv.epsilon / tn) * theta;
    }
    return best;
  }

 private:
  double feature_radius_;
};

// --------------------------------------------------------------------------------------------

class TanhRegression final : public Objective {
 public:
  explicit TanhRegression(const TanhRegressionParams& p)
      : Objective(FamilyId::tanh_regression, p.dim, p.dim + 1, p.domain_radius, p.adversarial, 0.0,
                  false),
        feature_radius_(p.feature_radius) {
    require(p.feature_radius > 0.0, "feature_radius must be positive");
    if (p.adversarial && p.adversarial->epsilon > 0.0) {
      require(p.adversarial->solver == InnerSolver::pgd,
              "tanh_regression supports only the pgd inner solver");
    }
    const double eps = adversarial() ? adversarial()->epsilon : 0.0;
    const double reach = p.feature_radius + effective_epsilon(p.adversarial, p.dim);
    ConstantsRecord c;
    c.L = kTanhSlope * reach;
    c.L_theta = kTanhCurvature * reach * reach;
    c.L_z = norm_conversion(adv_p(p.adversarial), p.dim) *
            (kTanhSlope + kTanhCurvature * reach * p.domain_radius);
    c.beta = c.L_theta;
    c.eta = 2.0 * c.L_z * eps;
    c.B = 4.0;
    set_constants(c);
  }

  bool in_example_space(const Example& z) const override {
    const int d = param_dim();
    return z.allFinite() && std::abs(z[d]) <= 1.0 &&
           z.head(d).norm() <= feature_radius_ * (1.0 + kTol) + kTol;
  }

  Example sample_example(std::mt19937_64& rng) const override {
    const int d = param_dim();
    Example z(d + 1);
    z.head(d) = uniform_in_ball(d, feature_radius_, rng);
    z[d] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return z;
  }

  nlohmann::json to_json() const override {
    auto j = common_json();
    j["feature_radius"] = feature_radius_;
    return j;
  }

 protected:
  int perturbable_dim() const override { return param_dim(); }

  double base_value(const Vector& theta, const Example& z) const override {
    const int d = param_dim();
    double r = std::tanh(theta.dot(z.head(d))) - z[d];
    return r * r;
  }
  Vector base_grad_theta(const Vector& theta, const Example& z) const override {
    const int d = param_dim();
    double t = std::tanh(theta.dot(z.head(d)));
    return (2.0 * (t - z[d]) * (1.0 - t * t)) * z.head(d);
  }
  Vector base_grad_perturbable(const Vector& theta, const Example& z) const override {
    const int d = param_dim();
    double t = std::tanh(theta.dot(z.head(d)));
    return (2.0 * (t - z[d]) * (1.0 - t * t)) * theta;
  }

 private:
  double feature_radius_;
};

// --------------------------------------------------------------------------------------------

class HardInstance final : public Objective {
 public:
  explicit HardInstance(const HardInstanceParams& p)
      : Objective(FamilyId::hard_instance, p.d, 1, kInf, std::nullopt, 0.0, true), params_(p) {
    require(p.horizon >= 1, "hard instance horizon T must be positive");
    require(p.d >= p.horizon, "hard instance needs d >= T");
    require(p.v >= 0.0, "hard instance needs v >= 0");
    require(p.K > 0.0, "hard instance needs K > 0");
    require(p.eta > 0.0, "hard instance needs eta > 0");
    ConstantsRecord c;
    c.L = std::max(p.eta, std::sqrt(static_cast<double>(p.horizon)) / p.K);
    // Adjacent coordinate pieces differ by η(e_j − e_k), a jump of √2·η.
    c.eta = p.horizon >= 2 ? std::sqrt(2.0) * p.eta : p.eta;
    set_constants(c);
  }

  const HardInstanceParams& params() const { return params_; }

  bool in_example_space(const Example& z) const override {
    return z.size() == 1 && (z[0] == 0.0 || z[0] == 1.0);
  }

  Example sample_example(std::mt19937_64& rng) const override {
    Example z(1);
    z[0] = std::bernoulli_distribution(0.5)(rng) ? 1.0 : 0.0;
    return z;
  }

  std::optional<KinkProbe> sample_kink(const Example& z, double radius,
                                       std::mt19937_64& rng) const override {
    if (z[0] != 0.0) return std::nullopt;
    const int T = params_.horizon;
    const double v = params_.v;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(1, T);
    Vector point = Vector::Zero(param_dim());
    const double spread = std::min(1.0, radius);
    if (T == 1 || std::bernoulli_distribution(0.5)(rng)) {
      // Zero piece against piece k: θ_k = v, every other piece strictly below zero.
      int k = pick(rng);
      for (int j = 1; j <= T; ++j) point[j - 1] = v - spread * (0.05 + 0.95 * unit(rng));
      point[k - 1] = v;
      return KinkProbe{point, Vector::Unit(param_dim(), k - 1)};
    }
    // Pieces j and k tie at the top.
    int j = pick(rng);
    int k = pick(rng);
    while (k == j) k = pick(rng);
    double top = v + spread * (0.05 + 0.95 * unit(rng));
    for (int i = 1; i <= T; ++i) point[i - 1] = top - spread * (0.05 + 0.95 * unit(rng));
    point[j - 1] = top;
    point[k - 1] = top;
    Vector dir = Vector::Unit(param_dim(), j - 1) - Vector::Unit(param_dim(), k - 1);
    return KinkProbe{point, dir / dir.norm()};
  }

  nlohmann::json to_json() const override {
    return {{"family", "hard_instance"}, {"dim", params_.d},  {"horizon", params_.horizon},
            {"v", params_.v},            {"K", params_.K},    {"eta", params_.eta}};
  }

 protected:
  double base_value(const Vector& theta, const Example& z) const override { return raw_value(theta, z); }
  Vector base_grad_theta(const Vector& theta, const Example& z) const override {
    return raw_subgradient(theta, z);
  }
  Vector base_grad_perturbable(const Vector&, const Example&) const override {
    throw Unsupported("hard instance has a discrete example space");
  }

  double raw_value(const Vector& theta, const Example& z) const override {
    const int T = params_.horizon;
    if (z[0] == 1.0) return -theta.head(T).sum() / params_.K;
    double best = 0.0;
    for (int j = 0; j < T; ++j) best = std::max(best, theta[j] - params_.v);
    return params_.eta * best;
  }

  Vector raw_subgradient(const Vector& theta, const Example& z) const override {
    const int T = params_.horizon;
    Vector d = Vector::Zero(param_dim());
    if (z[0] == 1.0) {
      d.head(T).setConstant(-1.0 / params_.K);
      return d;
    }
    // Lowest-index active piece; piece 0 is the constant zero.
    double best = 0.0;
    int active = -1;
    for (int j = 0; j < T; ++j) {
      if (theta[j] - params_.v > best) {
        best = theta[j] - params_.v;
        active = j;
      }
    }
    if (active >= 0) d[active] = params_.eta;
    return d;
  }

 private:
  HardInstanceParams params_;
};

}  // namespace

ObjectivePtr make_shift_quadratic(const ShiftQuadraticParams& params) {
  return std::make_shared<ShiftQuadratic>(params);
}

ObjectivePtr make_logistic(const LogisticParams& params) {
  return std::make_shared<Logistic>(params);
}

ObjectivePtr make_tanh_regression(const TanhRegressionParams& params) {
  return std::make_shared<TanhRegression>(params);
}

ObjectivePtr make_hard_instance_objective(const HardInstanceParams& params) {
  return std::make_shared<HardInstance>(params);
}

AdversarialConfig adversarial_from_json(const nlohmann::json& j) {
  check_keys(j, {"epsilon", "p", "solver", "pgd_steps", "pgd_step_size", "delta_epsilon"},
             "adversarial");
  AdversarialConfig a;
  a.epsilon = get_required<double>(j, "epsilon", "adversarial");
  if (auto it = j.find("p"); it != j.end()) {
    if (it->is_string()) {
      require(it->get<std::string>() == "inf", "adversarial: p must be 2 or \"inf\"");
      a.p = kInf;
    } else {
      require(it->is_number(), "adversarial: p must be 2 or \"inf\"");
      a.p = it->get<double>();
    }
  }
  std::string solver = get_or<std::string>(j, "solver", "closed_form");
  if (solver == "closed_form") {
    a.solver = InnerSolver::closed_form;
  } else if (solver == "endpoint_enumeration") {
    a.solver = InnerSolver::endpoint_enumeration;
  } else if (solver == "pgd") {
    a.solver = InnerSolver::pgd;
  } else {
    throw InvalidInput("adversarial: unknown solver '" + solver + "'");
  }
  a.pgd_steps = get_or<int>(j, "pgd_steps", 10);
  if (j.contains("pgd_step_size") && !j["pgd_step_size"].is_null()) {
    a.pgd_step_size = j["pgd_step_size"].get<double>();
  }
  a.delta_epsilon = get_or<double>(j, "delta_epsilon", 0.0);
  a.validate();
  return a;
}

ObjectivePtr make_objective(const nlohmann::json& j) {
  require(j.is_object(), "objective: expected a JSON object");
  const std::string family = get_required<std::string>(j, "family", "objective");
  auto adversarial = [&]() -> std::optional<AdversarialConfig> {
    auto it = j.find("adversarial");
    if (it == j.end() || it->is_null()) return std::nullopt;
    return adversarial_from_json(*it);
  };
  if (family == "shift_quadratic") {
    check_keys(j, {"family", "dim", "domain_radius", "example_radius", "ridge", "adversarial"},
               "objective");
    ShiftQuadraticParams p;
    p.dim = get_or<int>(j, "dim", 1);
    p.domain_radius = get_or<double>(j, "domain_radius", p.domain_radius);
    p.example_radius = get_or<double>(j, "example_radius", p.example_radius);
    p.ridge = get_or<double>(j, "ridge", 0.0);
    p.adversarial = adversarial();
    return make_shift_quadratic(p);
  }
  if (family == "logistic") {
    check_keys(j, {"family", "dim", "domain_radius", "feature_radius", "ridge", "adversarial"},
               "objective");
    LogisticParams p;
    p.dim = get_or<int>(j, "dim", p.dim);
    p.domain_radius = get_or<double>(j, "domain_radius", p.domain_radius);
    p.feature_radius = get_or<double>(j, "feature_radius", p.feature_radius);
    p.ridge = get_or<double>(j, "ridge", 0.0);
    p.adversarial = adversarial();
    return make_logistic(p);
  }
  if (family == "tanh_regression") {
    check_keys(j, {"family", "dim", "domain_radius", "feature_radius", "adversarial"}, "objective");
    TanhRegressionParams p;
    p.dim = get_or<int>(j, "dim", p.dim);
    p.domain_radius = get_or<double>(j, "domain_radius", p.domain_radius);
    p.feature_radius = get_or<double>(j, "feature_radius", p.feature_radius);
    p.adversarial = adversarial();
    return make_tanh_regression(p);
  }
  if (family == "hard_instance") {
    return make_hard_instance_objective(hard_instance_params_from_json(j));
  }
  throw InvalidInput("objective: unknown family '" + family + "'");
}

HardInstanceParams hard_instance_params_from_json(const nlohmann::json& j) {
  check_keys(j, {"family", "dim", "horizon", "v", "K", "eta"}, "objective");
  HardInstanceParams p;
  p.horizon = get_required<int>(j, "horizon", "objective");
  p.d = get_or<int>(j, "dim", p.horizon);
  p.v = get_or<double>(j, "v", 0.0);
  p.K = get_or<double>(j, "K", 1.0);
  p.eta = get_or<double>(j, "eta", 1.0);
  return p;
}

}  // namespace stablab
