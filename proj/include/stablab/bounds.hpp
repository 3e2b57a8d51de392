#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stablab {

double sum_of(const std::vector<double>& alphas);
double sum_of_squares(const std::vector<double>& alphas);

/// L(η + 2L/n)·Σα_t.
double ub_convex(double L, double eta, int n, double sum_alpha);
double ub_convex(double L, double eta, int n, const std::vector<double>& alphas);

/// (2·L·L_z·(ε + Δε) + 2L²/n)·Σα_t.
double ub_convex_subopt(double L, double L_z, double epsilon, double delta_epsilon, int n,
                        double sum_alpha);
double ub_convex_subopt(double L, double L_z, double epsilon, double delta_epsilon, int n,
                        const std::vector<double>& alphas);

struct NonconvexBound {
  double value = 0.0;
  int t0 = 1;
  std::optional<double> simplified;  // present when c = 1/β
};

/// min over integer t₀ ∈ [1, n] of B·t₀/(n−1) + ((2L²+Lηn)/(β(n−1)))·(T/t₀)^{βc}.
/// `t0` pins the minimizer; `L_theta` (default β) feeds the simplified form.
NonconvexBound ub_nonconvex(double B, double beta, double L, double eta, int n, int T, double c,
                            std::optional<int> t0 = {}, std::optional<double> L_theta = {});

/// Lη/γ + 2L²/(γn).
double ub_strongly_convex(double L, double eta, double gamma, int n);

/// (Lη/2 + L²/n)·Σα_t.
double ub_swa(double L, double eta, int n, double sum_alpha);
double ub_swa(double L, double eta, int n, const std::vector<double>& alphas);

/// (D² + L²·Σα_t²)/Σα_t; infinite when Σα_t = 0.
double opt_convex(double D, double L, double sum_alpha, double sum_alpha_sq);
double opt_convex(double D, double L, const std::vector<double>& alphas);

/// L·D²/T.
double opt_strongly_convex(double L, double D, double T);

struct TradeoffTerms {
  double T = 0.0;
  double additional = 0.0;    // LηTα
  double stability = 0.0;     // 2L²Tα/n
  double optimization = 0.0;  // D²/(Tα)
  double residual = 0.0;      // L²α
  double total = 0.0;
};

TradeoffTerms tradeoff_fixed(double L, double eta, int n, double D, double alpha, double T);
std::vector<TradeoffTerms> tradeoff_series(double L, double eta, int n, double D, double alpha,
                                           const std::vector<double>& Ts);

/// c_η·ηα√T + c_n·LαT/n.
double lb_uas(double eta, double L, double alpha, double T, int n, double c_eta = 1.0,
              double c_n = 1.0);

/// L_z·L_zθ/μ + L_θ.
double beta2_strongly_concave(double L_z, double L_ztheta, double mu, double L_theta);

/// η²/τ² + 2ησ/τ + (2/√T)(D/τ + βσ²/(2τ)).
double convergence_bound(double eta, double tau, double sigma, double D, double beta, double T);

struct ValidityFlag {
  std::string condition;
  std::string status;  // satisfied | violated | unchecked
};

struct BoundReport {
  std::string bound_id;
  nlohmann::json inputs;
  double value = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  std::vector<ValidityFlag> flags;
  nlohmann::json extras = nlohmann::json::object();
};

const std::vector<std::string>& bound_ids();

/// Evaluates a bound from named inputs. Step sizes come from "alphas" (array),
/// "sum_alpha" (and "sum_alpha_sq"), or "schedule" with "T". Unknown ids and keys are rejected.
BoundReport evaluate_bound(const std::string& bound_id, const nlohmann::json& inputs);

nlohmann::json to_json(const BoundReport& report);

}  // namespace stablab
