#pragma once

// Independent reference formulas used by the tests. None of these call into the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;

inline double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }
inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// ½(|θ−z|+ε)² and its derivative; at θ = z the tie resolves to z* = z−ε, slope +ε.
inline double shift_quadratic_1d(double theta, double z, double eps) {
  double r = std::abs(theta - z) + eps;
  return 0.5 * r * r;
}
inline double shift_quadratic_1d_grad(double theta, double z, double eps) {
  return theta >= z ? theta - z + eps : theta - z - eps;
}

// p = ∞: ½ Σ_j (|θ_j − z_j| + ε)².
inline double shift_quadratic_linf(const Vec& theta, const Vec& z, double eps) {
  double v = 0.0;
  for (int j = 0; j < theta.size(); ++j) v += 0.5 * std::pow(std::abs(theta[j] - z[j]) + eps, 2);
  return v;
}
// p = 2: ½ (‖θ − z‖ + ε)².
inline double shift_quadratic_l2(const Vec& theta, const Vec& z, double eps) {
  return 0.5 * std::pow((theta - z).norm() + eps, 2);
}

// Adversarial logistic loss: max over ‖δ‖_∞ ≤ ε of softplus(−yθᵀ(x+δ)) = softplus(−yθᵀx + ε‖θ‖₁).
inline double logistic_linf(const Vec& theta, const Vec& x, double y, double eps) {
  return softplus(-y * theta.dot(x) + eps * theta.lpNorm<1>());
}
// Its gradient with sign(0) taken as y (the lowest-index endpoint x_j − ε).
inline Vec logistic_linf_grad(const Vec& theta, const Vec& x, double y, double eps) {
  double m = -y * theta.dot(x) + eps * theta.lpNorm<1>();
  Vec s(theta.size());
  for (int j = 0; j < theta.size(); ++j) s[j] = theta[j] > 0 ? 1.0 : (theta[j] < 0 ? -1.0 : y);
  return sigmoid(m) * (-y * x + eps * s);
}
inline double logistic_l2(const Vec& theta, const Vec& x, double y, double eps) {
  return softplus(-y * theta.dot(x) + eps * theta.norm());
}

// Largest ‖h'(a) − h'(b)‖ − β|a − b| over all pairs of a uniform grid on [lo, hi].
template <typename Grad>
double grid_eta(Grad grad, double lo, double hi, int points, double beta) {
  std::vector<double> xs(points), gs(points);
  for (int k = 0; k < points; ++k) {
    xs[k] = lo + (hi - lo) * k / (points - 1);
    gs[k] = grad(xs[k]);
  }
  double best = 0.0;
  for (int a = 0; a < points; ++a)
    for (int b = a + 1; b < points; ++b)
      best = std::max(best, std::abs(gs[a] - gs[b]) - beta * std::abs(xs[a] - xs[b]));
  return best;
}

// Lower-bound instance under full-batch descent from 0:
// θ^t_j = tα/(nK) − αη(n−1)/n·[j < t] for j ≤ T.
inline Vec hard_instance_theta(int d, int T, int n, double alpha, double eta, double K, int t) {
  Vec theta = Vec::Zero(d);
  for (int j = 1; j <= T; ++j) {
    theta[j - 1] = t * alpha / (n * K);
    if (j < t) theta[j - 1] -= alpha * eta * (n - 1) / static_cast<double>(n);
  }
  return theta;
}

}  // namespace oracle
