#pragma once

#include "stablab/core.hpp"
#include "stablab/objective.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace stablab {

enum class ScheduleKind { fixed, diminishing, cyclic, piecewise };

/// Step-size rule α_t for t = 1, 2, …
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::fixed;
  double alpha = 0.0;                          // fixed
  double c = 0.0;                              // diminishing: α_t = c / t
  double peak = 0.0;                           // cyclic: 0 → peak on [0, t_peak], peak → 0 on [t_peak, horizon]
  int t_peak = 0;
  int horizon = 0;
  std::vector<std::pair<int, double>> pieces;  // piecewise: (first step, α), first step of the first piece is 1
  std::optional<double> cap;                   // α_t ≤ cap, applied last

  static ScheduleSpec fixed(double alpha);
  static ScheduleSpec diminishing(double c);
  static ScheduleSpec cyclic(double peak, int t_peak, int horizon);
  static ScheduleSpec piecewise(std::vector<std::pair<int, double>> pieces);

  void validate() const;
};

double schedule_alpha(const ScheduleSpec& schedule, int t);
std::vector<double> schedule_series(const ScheduleSpec& schedule, int T);

/// Parses {"kind": ...}. A diminishing schedule without "c" takes c = 1/beta_default.
ScheduleSpec schedule_from_json(const nlohmann::json& j, std::optional<double> beta_default = {});
nlohmann::json to_json(const ScheduleSpec& schedule);

enum class SamplingScheme { with_replacement, fixed_permutation, full_batch };

std::string to_string(SamplingScheme scheme);
SamplingScheme scheme_from_string(const std::string& name);

/// Seeded sequence of example indices (0-based). full_batch yields -1 every step.
class IndexStream {
 public:
  IndexStream(SamplingScheme scheme, int n, std::uint64_t seed);

  int next();
  const std::vector<int>& permutation() const { return permutation_; }

 private:
  SamplingScheme scheme_;
  int n_;
  std::mt19937_64 rng_;
  std::vector<int> permutation_;
  std::size_t cursor_ = 0;
};

struct StepEntry {
  int t = 0;
  int index = 0;  // 1-based sampled index, 0 for full-batch steps
  double alpha = 0.0;
  double loss = 0.0;  // loss of the sampled example (or R_S) at θ^{t−1}
  double grad_norm = 0.0;
};

struct BestIterate {
  int t = 0;
  double risk = 0.0;
  Vector theta;
};

struct TrajectoryRecord {
  std::vector<StepEntry> steps;
  Vector final_theta;
  std::optional<Vector> swa_average;
  std::vector<Vector> iterates;       // θ^0 … θ^T when requested
  std::optional<BestIterate> best;    // lowest R_S iterate when requested
  std::uint64_t seed = 0;
  SamplingScheme scheme = SamplingScheme::with_replacement;
};

struct RunOptions {
  std::optional<Vector> theta0;       // zero when unset
  bool swa = false;
  std::optional<double> radius;       // projection radius, defaults to the objective's domain
  bool record_iterates = false;
  bool track_risk = false;
};

Vector project_ball(const Vector& theta, double radius);
double empirical_risk(const Objective& obj, const Dataset& S, const Vector& theta);
Vector empirical_gradient(const Objective& obj, const Dataset& S, const Vector& theta);

struct StepResult {
  Vector theta;
  double loss = 0.0;
  double grad_norm = 0.0;
};

/// θ ← Π_R(θ − α·d) with d the subgradient at example `index` (0-based), or the mean
/// subgradient over S when index < 0.
StepResult sgd_step(const Objective& obj, const Dataset& S, const Vector& theta, int index,
                    double alpha, double radius);

/// Projected single-example SGD for T steps.
TrajectoryRecord run(const Objective& obj, const Dataset& S, const ScheduleSpec& schedule,
                     SamplingScheme scheme, int T, std::uint64_t seed, const RunOptions& options = {});

/// Early-stopping horizon D / (α·√(Lη + 2L²/n)).
double tstar(double D, double alpha, double L, double eta, int n);

/// CSV (t,i_t,alpha,loss,grad_norm) followed by a `# {json}` footer line.
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out);
/// FNV-1a digest of the raw bytes of θ, hex encoded.
std::string theta_digest(const Vector& theta);

}  // namespace stablab
