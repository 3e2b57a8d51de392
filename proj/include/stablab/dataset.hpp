#pragma once

#include "stablab/core.hpp"
#include "stablab/objective.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <random>
#include <utility>

namespace stablab {

/// Two datasets of equal size that agree everywhere except at `differing_index` (1-based).
struct NeighborPair {
  Dataset S;
  Dataset S_prime;
  int differing_index = 1;

  int n() const { return static_cast<int>(S.size()); }
};

/// Source of i.i.d. examples.
class ExampleDistribution {
 public:
  virtual ~ExampleDistribution() = default;
  virtual Example sample(std::mt19937_64& rng) const = 0;
  virtual nlohmann::json to_json() const = 0;

  Dataset sample_many(int count, std::mt19937_64& rng) const;
};

using DistributionPtr = std::shared_ptr<const ExampleDistribution>;

/// z uniform on [−half_width, half_width]^dim.
DistributionPtr make_uniform_box(int dim, double half_width);
/// z uniform in the Euclidean ball of the given radius.
DistributionPtr make_uniform_ball(int dim, double radius);
/// (x, y): x uniform in a ball, y = sign(wᵀx) with w = teacher_scale·1/√d, flipped w.p. label_noise.
DistributionPtr make_logistic_data(int dim, double feature_radius, double teacher_scale,
                                   double label_noise);
/// (x, y): x uniform in a ball, y = clamp(tanh(wᵀx) + noise·U[−1,1], −1, 1).
DistributionPtr make_tanh_data(int dim, double feature_radius, double teacher_scale, double noise);
/// z ∈ {0, 1} with P(z = 1) = p_one (the lower-bound example space).
DistributionPtr make_bernoulli_examples(double p_one);

DistributionPtr make_distribution(const nlohmann::json& config);

/// Draws S i.i.d. and re-draws index i (1-based) independently for S′. With
/// `identical` set, S′ = S.
NeighborPair make_neighbors(const ExampleDistribution& dist, int n, int i, std::uint64_t seed,
                            bool identical = false);

/// Hard lower-bound instance plus its neighbors: S has one z=1 and n−1 z=0, S′ is all z=0.
std::pair<ObjectivePtr, NeighborPair> make_hard_instance(const HardInstanceParams& params, int n);

}  // namespace stablab
