#include "stablab/bounds.hpp"
#include "stablab/core.hpp"
#include "stablab/json_util.hpp"
#include "stablab/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stablab {

namespace {

void nonneg(double v, const char* name) {
  require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be a finite value >= 0");
}

void positive_n(int n) { require(n >= 1, "n must be >= 1"); }

}  // namespace

double sum_of(const std::vector<double>& alphas) {
  for (double a : alphas) nonneg(a, "alpha_t");
  return std::accumulate(alphas.begin(), alphas.end(), 0.0);
}

double sum_of_squares(const std::vector<double>& alphas) {
  double s = 0.0;
  for (double a : alphas) {
    nonneg(a, "alpha_t");
    s += a * a;
  }
  return s;
}

double ub_convex(double L, double eta, int n, double sum_alpha) {
  nonneg(L, "L");
  nonneg(eta, "eta");
  nonneg(sum_alpha, "sum_alpha");
  positive_n(n);
  return L * (eta + 2.0 * L / n) * sum_alpha;
}

double ub_convex(double L, double eta, int n, const std::vector<double>& alphas) {
  return ub_convex(L, eta, n, sum_of(alphas));
}

double ub_convex_subopt(double L, double L_z, double epsilon, double delta_epsilon, int n,
                        double sum_alpha) {
  nonneg(L, "L");
  nonneg(L_z, "L_z");
  nonneg(epsilon, "epsilon");
  nonneg(delta_epsilon, "delta_epsilon");
  nonneg(sum_alpha, "sum_alpha");
  positive_n(n);
  return (2.0 * L * L_z * (epsilon + delta_epsilon) + 2.0 * L * L / n) * sum_alpha;
}

double ub_convex_subopt(double L, double L_z, double epsilon, double delta_epsilon, int n,
                        const std::vector<double>& alphas) {
  return ub_convex_subopt(L, L_z, epsilon, delta_epsilon, n, sum_of(alphas));
}

NonconvexBound ub_nonconvex(double B, double beta, double L, double eta, int n, int T, double c,
                            std::optional<int> t0, std::optional<double> L_theta) {
  nonneg(B, "B");
  nonneg(L, "L");
  nonneg(eta, "eta");
  nonneg(c, "c");
  require(beta > 0.0 && std::isfinite(beta), "beta must be > 0");
  require(n >= 2, "ub_nonconvex needs n >= 2");
  require(T >= 1, "T must be >= 1");
  const double scale = (2.0 * L * L + L * eta * n) / (beta * (n - 1));
  const double q = beta * c;
  auto at = [&](int t) {
    return B * t / (n - 1) + scale * std::pow(static_cast<double>(T) / t, q);
  };
  NonconvexBound out;
  if (t0) {
    require(*t0 >= 1 && *t0 <= n, "t0 must lie in [1, n]");
    out.t0 = *t0;
    out.value = at(*t0);
  } else {
    out.value = kInf;
    for (int t = 1; t <= n; ++t) {
      double v = at(t);
      if (v < out.value) {
        out.value = v;
        out.t0 = t;
      }
    }
  }
  if (std::abs(q - 1.0) <= 1e-12) {
    double lt = L_theta.value_or(beta);
    nonneg(lt, "L_theta");
    out.simplified = (B * lt + (2.0 * L * L + L * eta * n) * T) / (beta * (n - 1));
  }
  return out;
}

double ub_strongly_convex(double L, double eta, double gamma, int n) {
  nonneg(L, "L");
  nonneg(eta, "eta");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be > 0");
  positive_n(n);
  return L * eta / gamma + 2.0 * L * L / (gamma * n);
}

double ub_swa(double L, double eta, int n, double sum_alpha) {
  nonneg(L, "L");
  nonneg(eta, "eta");
  nonneg(sum_alpha, "sum_alpha");
  positive_n(n);
  return (L * eta / 2.0 + L * L / n) * sum_alpha;
}

double ub_swa(double L, double eta, int n, const std::vector<double>& alphas) {
  return ub_swa(L, eta, n, sum_of(alphas));
}

double opt_convex(double D, double L, double sum_alpha, double sum_alpha_sq) {
  nonneg(D, "D");
  nonneg(L, "L");
  nonneg(sum_alpha, "sum_alpha");
  nonneg(sum_alpha_sq, "sum_alpha_sq");
  if (sum_alpha == 0.0) return kInf;
  return (D * D + L * L * sum_alpha_sq) / sum_alpha;
}

double opt_convex(double D, double L, const std::vector<double>& alphas) {
  return opt_convex(D, L, sum_of(alphas), sum_of_squares(alphas));
}

double opt_strongly_convex(double L, double D, double T) {
  nonneg(L, "L");
  nonneg(D, "D");
  require(T > 0.0, "T must be > 0");
  return L * D * D / T;
}

TradeoffTerms tradeoff_fixed(double L, double eta, int n, double D, double alpha, double T) {
  nonneg(L, "L");
  nonneg(eta, "eta");
  nonneg(D, "D");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be > 0");
  require(T > 0.0 && std::isfinite(T), "T must be > 0");
  positive_n(n);
  TradeoffTerms t;
  t.T = T;
  t.additional = L * eta * T * alpha;
  t.stability = 2.0 * L * L * T * alpha / n;
  t.optimization = D * D / (T * alpha);
  t.residual = L * L * alpha;
  t.total = t.additional + t.stability + t.optimization + t.residual;
  return t;
}

std::vector<TradeoffTerms> tradeoff_series(double L, double eta, int n, double D, double alpha,
                                           const std::vector<double>& Ts) {
  std::vector<TradeoffTerms> out;
  out.reserve(Ts.size());
  for (double T : Ts) out.push_back(tradeoff_fixed(L, eta, n, D, alpha, T));
  return out;
}

double lb_uas(double eta, double L, double alpha, double T, int n, double c_eta, double c_n) {
  nonneg(eta, "eta");
  nonneg(L, "L");
  nonneg(alpha, "alpha");
  nonneg(T, "T");
  nonneg(c_eta, "c_eta");
  nonneg(c_n, "c_n");
  positive_n(n);
  return c_eta * eta * alpha * std::sqrt(T) + c_n * L * alpha * T / n;
}

double beta2_strongly_concave(double L_z, double L_ztheta, double mu, double L_theta) {
  nonneg(L_z, "L_z");
  nonneg(L_ztheta, "L_ztheta");
  nonneg(L_theta, "L_theta");
  require(mu > 0.0, "mu must be > 0");
  return L_z * L_ztheta / mu + L_theta;
}

double convergence_bound(double eta, double tau, double sigma, double D, double beta, double T) {
  nonneg(eta, "eta");
  nonneg(sigma, "sigma");
  nonneg(D, "D");
  nonneg(beta, "beta");
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(T > 0.0, "T must be > 0");
  return eta * eta / (tau * tau) + 2.0 * eta * sigma / tau +
         (2.0 / std::sqrt(T)) * (D / tau + beta * sigma * sigma / (2.0 * tau));
}

const std::vector<std::string>& bound_ids() {
  static const std::vector<std::string> ids = {
      "ub_convex",   "ub_convex_subopt",    "ub_nonconvex",   "ub_strongly_convex",
      "ub_swa",      "opt_convex",          "opt_strongly_convex", "tradeoff_fixed",
      "tstar",       "lb_uas",              "beta2_strongly_concave", "convergence_bound"};
  return ids;
}

namespace {

struct StepSizes {
  double sum = 0.0;
  std::optional<double> sum_sq;
  std::optional<double> max;
};

StepSizes step_sizes(const nlohmann::json& in) {
  StepSizes s;
  int sources = in.contains("alphas") + in.contains("sum_alpha") + in.contains("schedule");
  require(sources == 1, "bounds: give exactly one of alphas, sum_alpha, schedule");
  if (in.contains("alphas")) {
    auto alphas = in["alphas"].get<std::vector<double>>();
    s.sum = sum_of(alphas);
    s.sum_sq = sum_of_squares(alphas);
    s.max = alphas.empty() ? 0.0 : *std::max_element(alphas.begin(), alphas.end());
  } else if (in.contains("sum_alpha")) {
    s.sum = in["sum_alpha"].get<double>();
    if (in.contains("sum_alpha_sq")) s.sum_sq = in["sum_alpha_sq"].get<double>();
    if (in.contains("max_alpha")) s.max = in["max_alpha"].get<double>();
  } else {
    auto beta = in.contains("beta") ? std::optional<double>(in["beta"].get<double>()) : std::nullopt;
    ScheduleSpec sched = schedule_from_json(in["schedule"], beta);
    auto alphas = schedule_series(sched, get_required<int>(in, "T", "bounds"));
    s.sum = sum_of(alphas);
    s.sum_sq = sum_of_squares(alphas);
    s.max = alphas.empty() ? 0.0 : *std::max_element(alphas.begin(), alphas.end());
  }
  return s;
}

ValidityFlag step_flag(const nlohmann::json& in, const StepSizes& s) {
  ValidityFlag f{"alpha_t <= 1/beta", "unchecked"};
  if (in.contains("beta") && s.max) {
    double beta = in["beta"].get<double>();
    f.status = (*s.max * beta <= 1.0 + 1e-12) ? "satisfied" : "violated";
  }
  return f;
}

double num(const nlohmann::json& in, const char* key) { return get_required<double>(in, key, "bounds"); }
int whole(const nlohmann::json& in, const char* key) { return get_required<int>(in, key, "bounds"); }

}  // namespace

BoundReport evaluate_bound(const std::string& id, const nlohmann::json& in) {
  BoundReport r;
  r.bound_id = id;
  r.inputs = in;
  const auto alpha_keys = {"alphas", "sum_alpha", "sum_alpha_sq", "max_alpha", "schedule", "T", "beta"};
  auto allow = [&](std::initializer_list<const char*> own, bool with_alphas) {
    std::vector<const char*> keys(own);
    if (with_alphas) keys.insert(keys.end(), alpha_keys.begin(), alpha_keys.end());
    require(in.is_object(), "bounds: inputs must be a JSON object");
    for (const auto& item : in.items()) {
      bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
      require(known, "bounds: unknown input '" + item.key() + "' for " + id);
    }
  };

  if (id == "ub_convex" || id == "ub_swa") {
    allow({"L", "eta", "n"}, true);
    StepSizes s = step_sizes(in);
    double L = num(in, "L"), eta = num(in, "eta");
    int n = whole(in, "n");
    double scale = id == "ub_swa" ? 0.5 : 1.0;
    r.value = id == "ub_swa" ? ub_swa(L, eta, n, s.sum) : ub_convex(L, eta, n, s.sum);
    r.terms = {{"eta_term", scale * L * eta * s.sum}, {"sample_term", scale * 2.0 * L * L * s.sum / n}};
    r.flags.push_back(step_flag(in, s));
    r.extras["sum_alpha"] = s.sum;
  } else if (id == "ub_convex_subopt") {
    allow({"L", "L_z", "epsilon", "delta_epsilon", "n"}, true);
    StepSizes s = step_sizes(in);
    double L = num(in, "L"), Lz = num(in, "L_z"), eps = num(in, "epsilon"), de = num(in, "delta_epsilon");
    int n = whole(in, "n");
    r.value = ub_convex_subopt(L, Lz, eps, de, n, s.sum);
    r.terms = {{"attack_term", 2.0 * L * Lz * (eps + de) * s.sum}, {"sample_term", 2.0 * L * L * s.sum / n}};
    r.flags.push_back(step_flag(in, s));
    r.flags.push_back({"delta_epsilon <= 2*epsilon", de <= 2.0 * eps + 1e-15 ? "satisfied" : "violated"});
    r.extras["sum_alpha"] = s.sum;
  } else if (id == "ub_nonconvex") {
    allow({"B", "beta", "L", "eta", "n", "T", "c", "t0", "L_theta"}, false);
    double beta = num(in, "beta");
    double c = in.contains("c") ? num(in, "c") : 1.0 / beta;
    auto t0 = in.contains("t0") ? std::optional<int>(whole(in, "t0")) : std::nullopt;
    auto lt = in.contains("L_theta") ? std::optional<double>(num(in, "L_theta")) : std::nullopt;
    NonconvexBound b = ub_nonconvex(num(in, "B"), beta, num(in, "L"), num(in, "eta"), whole(in, "n"),
                                    whole(in, "T"), c, t0, lt);
    r.value = b.value;
    r.extras["t0"] = b.t0;
    r.extras["simplified"] = b.simplified ? nlohmann::json(*b.simplified) : nlohmann::json(nullptr);
    r.flags.push_back({"c <= 1/beta", c * beta <= 1.0 + 1e-12 ? "satisfied" : "violated"});
  } else if (id == "ub_strongly_convex") {
    allow({"L", "eta", "gamma", "n"}, false);
    double L = num(in, "L"), eta = num(in, "eta"), g = num(in, "gamma");
    int n = whole(in, "n");
    r.value = ub_strongly_convex(L, eta, g, n);
    r.terms = {{"eta_term", L * eta / g}, {"sample_term", 2.0 * L * L / (g * n)}};
  } else if (id == "opt_convex") {
    allow({"D", "L"}, true);
    StepSizes s = step_sizes(in);
    require(s.sum_sq.has_value(), "bounds: opt_convex needs alphas, schedule, or sum_alpha_sq");
    double D = num(in, "D"), L = num(in, "L");
    r.value = opt_convex(D, L, s.sum, *s.sum_sq);
    r.terms = {{"init_term", s.sum > 0 ? D * D / s.sum : kInf},
               {"noise_term", s.sum > 0 ? L * L * *s.sum_sq / s.sum : kInf}};
  } else if (id == "opt_strongly_convex") {
    allow({"L", "D", "T"}, false);
    r.value = opt_strongly_convex(num(in, "L"), num(in, "D"), num(in, "T"));
  } else if (id == "tradeoff_fixed") {
    allow({"L", "eta", "n", "D", "alpha", "T"}, false);
    TradeoffTerms t = tradeoff_fixed(num(in, "L"), num(in, "eta"), whole(in, "n"), num(in, "D"),
                                     num(in, "alpha"), num(in, "T"));
    r.value = t.total;
    r.terms = {{"additional", t.additional},
               {"stability", t.stability},
               {"optimization", t.optimization},
               {"residual", t.residual}};
  } else if (id == "tstar") {
    allow({"D", "alpha", "L", "eta", "n"}, false);
    r.value = tstar(num(in, "D"), num(in, "alpha"), num(in, "L"), num(in, "eta"), whole(in, "n"));
  } else if (id == "lb_uas") {
    allow({"eta", "L", "alpha", "T", "n", "c_eta", "c_n"}, false);
    double eta = num(in, "eta"), L = num(in, "L"), a = num(in, "alpha"), T = num(in, "T");
    int n = whole(in, "n");
    double ce = get_or<double>(in, "c_eta", 1.0), cn = get_or<double>(in, "c_n", 1.0);
    r.value = lb_uas(eta, L, a, T, n, ce, cn);
    r.terms = {{"eta_term", ce * eta * a * std::sqrt(T)}, {"sample_term", cn * L * a * T / n}};
    r.extras["multipliers"] = {{"c_eta", ce}, {"c_n", cn}};
  } else if (id == "beta2_strongly_concave") {
    allow({"L_z", "L_ztheta", "mu", "L_theta"}, false);
    r.value = beta2_strongly_concave(num(in, "L_z"), num(in, "L_ztheta"), num(in, "mu"), num(in, "L_theta"));
  } else if (id == "convergence_bound") {
    allow({"eta", "tau", "sigma", "D", "beta", "T"}, false);
    double eta = num(in, "eta"), tau = num(in, "tau"), sigma = num(in, "sigma"), D = num(in, "D"),
           beta = num(in, "beta"), T = num(in, "T");
    r.value = convergence_bound(eta, tau, sigma, D, beta, T);
    r.terms = {{"eta_term", eta * eta / (tau * tau) + 2.0 * eta * sigma / tau},
               {"rate_term", (2.0 / std::sqrt(T)) * (D / tau + beta * sigma * sigma / (2.0 * tau))}};
    double floor_T = std::pow(beta / (2.0 * (1.0 - tau)), 2.0);
    r.flags.push_back({"T >= (beta/(2(1-tau)))^2", T >= floor_T ? "satisfied" : "violated"});
  } else {
    throw InvalidInput("unknown bound id '" + id + "'");
  }
  return r;
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json terms = nlohmann::json::object();
  for (const auto& [name, v] : r.terms) terms[name] = v;
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : r.flags) flags.push_back({{"condition", f.condition}, {"status", f.status}});
  return {{"bound", r.bound_id}, {"inputs", r.inputs}, {"value", r.value},
          {"terms", terms},      {"validity_flags", flags}, {"extras", r.extras}};
}

}  // namespace stablab
