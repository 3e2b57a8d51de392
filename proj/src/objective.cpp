#include "stablab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stablab {

std::string to_string(FamilyId family) {
  switch (family) {
    case FamilyId::shift_quadratic: return "shift_quadratic";
    case FamilyId::logistic: return "logistic";
    case FamilyId::tanh_regression: return "tanh_regression";
    case FamilyId::hard_instance: return "hard_instance";
  }
  return "unknown";
}

std::string to_string(InnerSolver solver) {
  switch (solver) {
    case InnerSolver::closed_form: return "closed_form";
    case InnerSolver::endpoint_enumeration: return "endpoint_enumeration";
    case InnerSolver::pgd: return "pgd";
  }
  return "unknown";
}

std::string to_string(Provenance provenance) {
  return provenance == Provenance::analytic ? "analytic" : "estimated";
}

void AdversarialConfig::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "adversarial epsilon must be >= 0");
  require(p == 2.0 || std::isinf(p), "adversarial p must be 2 or inf");
  require(delta_epsilon >= 0.0 && delta_epsilon <= 2.0 * epsilon + 1e-15,
          "delta_epsilon must lie in [0, 2*epsilon]");
  if (solver == InnerSolver::pgd) {
    require(pgd_steps >= 1, "pgd_steps must be positive");
    require(step_size() >= 0.0, "pgd step size must be >= 0");
  }
}

double norm_conversion(double p, int k) {
  if (k <= 1 || p == 2.0) return 1.0;
  return std::sqrt(static_cast<double>(k));
}

Objective::Objective(FamilyId family, int param_dim, int example_dim, double radius,
                     std::optional<AdversarialConfig> adversarial, double ridge, bool convex)
    : family_(family),
      param_dim_(param_dim),
      example_dim_(example_dim),
      radius_(radius),
      adversarial_(std::move(adversarial)),
      ridge_(ridge),
      convex_(convex) {
  require(param_dim >= 1, "parameter dimension must be positive");
  require(example_dim >= 1, "example dimension must be positive");
  require(radius > 0.0, "domain radius must be positive");
  require(ridge >= 0.0, "ridge must be >= 0");
  if (adversarial_) adversarial_->validate();
}

bool Objective::in_domain(const Vector& theta) const {
  if (theta.size() != param_dim_) return false;
  if (std::isinf(radius_)) return theta.allFinite();
  return theta.norm() <= radius_ * (1.0 + 1e-12) + 1e-12;
}

void Objective::check_args(const Vector& theta, const Example& z) const {
  if (theta.size() != param_dim_) {
    std::ostringstream msg;
    msg << "theta has dimension " << theta.size() << ", expected " << param_dim_;
    throw InvalidInput(msg.str());
  }
  if (!in_domain(theta)) {
    std::ostringstream msg;
    msg << "theta outside the domain ball: |theta| = " << theta.norm() << " > R = " << radius_;
    throw InvalidInput(msg.str());
  }
  if (z.size() != example_dim_ || !in_example_space(z)) {
    throw InvalidInput("example outside the example space of " + to_string(family_));
  }
}

double Objective::value(const Vector& theta, const Example& z) const {
  check_args(theta, z);
  double v = raw_value(theta, z);
  if (ridge_ > 0.0) v += 0.5 * ridge_ * theta.squaredNorm();
  return v;
}

Vector Objective::subgradient(const Vector& theta, const Example& z) const {
  check_args(theta, z);
  Vector d = raw_subgradient(theta, z);
  if (ridge_ > 0.0) d += ridge_ * theta;
  return d;
}

InnerResult Objective::inner_maximize(const Vector& theta, const Example& z) const {
  if (!adversarial_) {
    throw Unsupported("inner_maximize: " + to_string(family_) + " has no adversarial config");
  }
  check_args(theta, z);
  Example best = solve_inner(theta, z);
  double attained = base_value(theta, best);
  return {std::move(best), attained};
}

double Objective::raw_value(const Vector& theta, const Example& z) const {
  if (!is_adversarial()) return base_value(theta, z);
  return base_value(theta, solve_inner(theta, z));
}

Vector Objective::raw_subgradient(const Vector& theta, const Example& z) const {
  if (!is_adversarial()) return base_grad_theta(theta, z);
  return base_grad_theta(theta, solve_inner(theta, z));
}

std::optional<Example> Objective::closed_form_maximizer(const Vector&, const Example&) const {
  return std::nullopt;
}

std::optional<KinkProbe> Objective::sample_kink(const Example&, double, std::mt19937_64&) const {
  return std::nullopt;
}

Example Objective::solve_inner(const Vector& theta, const Example& z) const {
  const AdversarialConfig& adv = *adversarial_;
  if (adv.epsilon == 0.0) return z;
  switch (adv.solver) {
    case InnerSolver::closed_form: {
      auto best = closed_form_maximizer(theta, z);
      if (!best) throw Unsupported(to_string(family_) + " has no closed-form inner maximizer");
      return *best;
    }
    case InnerSolver::endpoint_enumeration: return enumerate_corners(theta, z);
    case InnerSolver::pgd: return run_pgd(theta, z);
  }
  return z;
}

Example Objective::enumerate_corners(const Vector& theta, const Example& z) const {
  const AdversarialConfig& adv = *adversarial_;
  const int k = perturbable_dim();
  if (!enumeration_exact()) {
    throw Unsupported("endpoint enumeration is not exact for " + to_string(family_));
  }
  if (k > 1 && adv.p == 2.0) {
    throw Unsupported("endpoint enumeration needs p = inf when more than one coordinate is perturbed");
  }
  require(k <= 20, "endpoint enumeration limited to 20 perturbed coordinates");
  // Corner c sets coordinate j to z_j + ε if bit j of c is set, else z_j − ε. Corner 0
  // (all −ε) is visited first, so strict improvement keeps the lowest-index maximizer.
  Example best = z;
  double best_value = -kInf;
  Example corner = z;
  const std::uint64_t count = std::uint64_t{1} << k;
  for (std::uint64_t c = 0; c < count; ++c) {
    for (int j = 0; j < k; ++j) {
      corner[j] = z[j] + (((c >> j) & 1U) ? adv.epsilon : -adv.epsilon);
    }
    double v = base_value(theta, corner);
    if (v > best_value) {
      best_value = v;
      best = corner;
    }
  }
  return best;
}

Example Objective::run_pgd(const Vector& theta, const Example& z) const {
  const AdversarialConfig& adv = *adversarial_;
  const int k = perturbable_dim();
  const double step = adv.step_size();
  Example current = z;
  Example best = z;
  double best_value = base_value(theta, z);
  for (int s = 0; s < adv.pgd_steps; ++s) {
    Vector grad = base_grad_perturbable(theta, current);
    if (std::isinf(adv.p)) {
      for (int j = 0; j < k; ++j) {
        double moved = current[j] + step * ((grad[j] > 0.0) - (grad[j] < 0.0));
        current[j] = std::clamp(moved, z[j] - adv.epsilon, z[j] + adv.epsilon);
      }
    } else {
      double gn = grad.norm();
      if (gn > 0.0) current.head(k) += (step / gn) * grad;
      Vector offset = current.head(k) - z.head(k);
      double on = offset.norm();
      if (on > adv.epsilon) current.head(k) = z.head(k) + (adv.epsilon / on) * offset;
    }
    double v = base_value(theta, current);
    if (v > best_value) {
      best_value = v;
      best = current;
    }
  }
  return best;
}

nlohmann::json Objective::common_json() const {
  nlohmann::json j;
  j["family"] = to_string(family_);
  j["dim"] = param_dim_;
  if (std::isfinite(radius_)) j["domain_radius"] = radius_;
  if (adversarial_) j["adversarial"] = stablab::to_json(*adversarial_);
  return j;
}

nlohmann::json to_json(const ConstantsRecord& c) {
  nlohmann::json j = {{"L", c.L},       {"L_theta", c.L_theta}, {"L_z", c.L_z},
                      {"beta", c.beta}, {"eta", c.eta},         {"provenance", to_string(c.provenance)}};
  j["gamma"] = c.gamma ? nlohmann::json(*c.gamma) : nlohmann::json(nullptr);
  j["B"] = c.B ? nlohmann::json(*c.B) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const AdversarialConfig& a) {
  nlohmann::json j = {{"epsilon", a.epsilon},
                      {"p", std::isinf(a.p) ? nlohmann::json("inf") : nlohmann::json(a.p)},
                      {"solver", to_string(a.solver)},
                      {"delta_epsilon", a.delta_epsilon}};
  if (a.solver == InnerSolver::pgd) {
    j["pgd_steps"] = a.pgd_steps;
    j["pgd_step_size"] = a.step_size();
  }
  return j;
}

}  // namespace stablab
