#pragma once

#include "stablab/core.hpp"
#include "stablab/dataset.hpp"
#include "stablab/objective.hpp"
#include "stablab/sgd.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stablab {

/// Per-replicate seed streams derived from a master seed.
namespace streams {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t differing_index = 2;
inline constexpr std::uint64_t index = 3;
inline constexpr std::uint64_t test = 4;
}  // namespace streams

inline std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, static_cast<std::uint64_t>(replicate));
}

struct CoupledOptions {
  std::optional<double> radius;  // projection radius, defaults to the objective's domain
  int record_every = 1;          // δ kept at t = 0, k, 2k, …, and T
};

/// Two trajectories from θ⁰ = 0 that consume one shared index stream.
struct CoupledRun {
  std::vector<int> t;              // recorded steps, starting at 0
  std::vector<double> delta;       // ‖θ_S^t − θ_S′^t‖ at the recorded steps
  std::vector<double> delta_swa;   // same for the running averages of θ¹…θ^t (0 at t = 0)
  std::vector<int> indices;        // i_t for t = 1..T (1-based, 0 for full-batch steps)
  std::vector<double> alphas;      // α_t for t = 1..T
  Vector theta_S;
  Vector theta_S_prime;
  Vector swa_S;
  Vector swa_S_prime;
  int differing_index = 1;
  int path_violations = 0;         // certificate failures (only counted when certified)
  bool path_certified = false;     // certificate applies: convex family and every α_t ≤ 1/β
  double worst_path_slack = -kInf;
};

CoupledRun coupled_run(const Objective& obj, const NeighborPair& pair, const ScheduleSpec& schedule,
                       SamplingScheme scheme, int T, std::uint64_t seed, const CoupledOptions& options = {});

/// Slack of the step certificate δ_{t+1} − δ_t ≤ α_tη + 2Lα_t·[i_t = i]; violations exceed 1e-9.
inline constexpr double kPathTolerance = 1e-9;

enum class UasMode { randomized, worst_case };

struct UasOptions {
  UasMode mode = UasMode::randomized;  // worst_case enumerates i ∈ [n], n ≤ 8
  int record_every = 1;
  int jobs = 1;
  std::optional<double> radius;
  bool identical = false;  // force S′ = S
};

struct StabilityReport {
  std::vector<int> t;
  std::vector<double> delta_mean;
  std::vector<double> delta_lo;
  std::vector<double> delta_hi;
  std::vector<double> delta_swa_mean;
  std::vector<double> delta_swa_lo;
  std::vector<double> delta_swa_hi;
  std::vector<double> final_deltas;      // δ_T per replicate
  std::vector<double> final_swa_deltas;  // SWA δ_T per replicate
  std::vector<double> alphas;            // α_1..α_T
  int replicates = 0;
  int path_violations = 0;
  bool path_certified = false;
  double worst_path_slack = -kInf;
  UasMode mode = UasMode::randomized;
};

/// Aggregates coupled runs over M replicates with fresh data, differing index, and
/// index stream per replicate.
StabilityReport measure_uas(const Objective& obj, const ExampleDistribution& dist, int n,
                            const ScheduleSpec& schedule, SamplingScheme scheme, int T, int M,
                            std::uint64_t seed, const UasOptions& options = {});

struct ReferenceMinimizer {
  Vector theta;
  double risk = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected full-batch descent on R_S with step 1/β (decaying when β = 0 or progress
/// stalls); stops at ‖∇R_S‖ ≤ tol and returns the lowest-risk iterate seen.
ReferenceMinimizer reference_minimizer(const Objective& obj, const Dataset& S, int max_iterations = 100000,
                                       double tol = 1e-8);

struct GapEstimate {
  double gen_gap = 0.0;
  double gen_gap_ci = 0.0;
  std::vector<double> gen_gaps;  // per replicate
  std::optional<double> opt_gap;
  std::string opt_gap_note;
  int test_sample_size = 0;
  int replicates = 0;
};

struct GapOptions {
  bool opt_gap = false;
  int jobs = 1;
  std::optional<double> radius;
};

/// Generalization gap R_D(θ^T) − R_S(θ^T) with R_D estimated on N_test fresh examples per
/// replicate. S is the first dataset of the same neighbor pair measure_uas draws.
GapEstimate estimate_gaps(const Objective& obj, const ExampleDistribution& dist, int n,
                          const ScheduleSpec& schedule, SamplingScheme scheme, int T, int M,
                          int N_test, std::uint64_t seed, const GapOptions& options = {});

struct ConvergenceReport {
  double min_mean_sq_grad = 0.0;
  int t_min = 0;
  double sigma = 0.0;
  bool sigma_estimated = true;
  double D = 0.0;
  double D_nonnegative_loss = 0.0;  // R_S(θ⁰): valid D for losses bounded below by 0
  double eta = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  int T = 0;
  int replicates = 0;
  double bound = 0.0;
  bool within_bound = false;
};

/// Runs M seeds with α = 1/√T and tracks min over t of the across-seed mean ‖∇R_S(θ^t)‖².
ConvergenceReport convergence_probe(const Objective& obj, const Dataset& S, SamplingScheme scheme, int T,
                                    int M, double tau, std::uint64_t seed,
                                    std::optional<double> sigma = {}, int jobs = 1);

/// θ^t on S for the lower-bound instance under full-batch descent (valid for t ≤ horizon):
/// (tα/(nK))·1_T − αη((n−1)/n)·Σ_{s<t} e_s.
Vector hard_instance_closed_form(const HardInstanceParams& params, int n, double alpha, int t);

/// Overlay columns of the stability CSV, in δ units.
struct BoundOverlay {
  std::vector<double> ub_convex;  // (η + 2L/n)·Σ_{s≤t} α_s, NaN when the family is non-convex
  std::vector<double> ub_swa;     // half of ub_convex
  std::vector<double> lb;         // ηα√t + Lαt/n for fixed α, NaN otherwise
};

BoundOverlay bound_overlay(const ConstantsRecord& constants, bool convex, int n,
                           const ScheduleSpec& schedule, const std::vector<int>& t,
                           const std::vector<double>& alphas);

/// Columns: t, delta_mean, delta_lo, delta_hi, delta_swa_mean, ub_convex, ub_swa, lb,
/// gen_gap, gen_gap_ci. The gap is written on the last row only.
void write_stability_csv(const StabilityReport& report, const BoundOverlay& overlay,
                         const std::optional<GapEstimate>& gap, std::ostream& out);

nlohmann::json to_json(const StabilityReport& report);
nlohmann::json to_json(const GapEstimate& gap);
nlohmann::json to_json(const ConvergenceReport& report);

}  // namespace stablab
