#include "stablab/dataset.hpp"
#include "stablab/json_util.hpp"
#include "stablab/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace stablab {

Dataset ExampleDistribution::sample_many(int count, std::mt19937_64& rng) const {
  Dataset out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(sample(rng));
  return out;
}

namespace {

class UniformBox final : public ExampleDistribution {
 public:
  UniformBox(int dim, double half_width) : dim_(dim), half_width_(half_width) {
    require(dim >= 1 && half_width >= 0.0, "uniform_box: bad parameters");
  }
  Example sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(-half_width_, half_width_);
    Example z(dim_);
    for (int j = 0; j < dim_; ++j) z[j] = u(rng);
    return z;
  }
  nlohmann::json to_json() const override {
    return {{"kind", "uniform_box"}, {"dim", dim_}, {"half_width", half_width_}};
  }

 private:
  int dim_;
  double half_width_;
};

class UniformBall final : public ExampleDistribution {
 public:
  UniformBall(int dim, double radius) : dim_(dim), radius_(radius) {
    require(dim >= 1 && radius >= 0.0, "uniform_ball: bad parameters");
  }
  Example sample(std::mt19937_64& rng) const override { return uniform_in_ball(dim_, radius_, rng); }
  nlohmann::json to_json() const override {
    return {{"kind", "uniform_ball"}, {"dim", dim_}, {"radius", radius_}};
  }

 private:
  int dim_;
  double radius_;
};

class LogisticData final : public ExampleDistribution {
 public:
  LogisticData(int dim, double radius, double teacher_scale, double label_noise)
      : dim_(dim), radius_(radius), teacher_scale_(teacher_scale), label_noise_(label_noise) {
    require(dim >= 1 && radius > 0.0, "logistic_data: bad parameters");
    require(label_noise >= 0.0 && label_noise <= 1.0, "logistic_data: label_noise in [0,1]");
  }
  Example sample(std::mt19937_64& rng) const override {
    Example z(dim_ + 1);
    z.head(dim_) = uniform_in_ball(dim_, radius_, rng);
    double margin = teacher_scale_ * z.head(dim_).sum() / std::sqrt(static_cast<double>(dim_));
    double y = margin >= 0.0 ? 1.0 : -1.0;
    if (std::bernoulli_distribution(label_noise_)(rng)) y = -y;
    z[dim_] = y;
    return z;
  }
  nlohmann::json to_json() const override {
    return {{"kind", "logistic_data"},
            {"dim", dim_},
            {"feature_radius", radius_},
            {"teacher_scale", teacher_scale_},
            {"label_noise", label_noise_}};
  }

 private:
  int dim_;
  double radius_;
  double teacher_scale_;
  double label_noise_;
};

class TanhData final : public ExampleDistribution {
 public:
  TanhData(int dim, double radius, double teacher_scale, double noise)
      : dim_(dim), radius_(radius), teacher_scale_(teacher_scale), noise_(noise) {
    require(dim >= 1 && radius > 0.0 && noise >= 0.0, "tanh_data: bad parameters");
  }
  Example sample(std::mt19937_64& rng) const override {
    Example z(dim_ + 1);
    z.head(dim_) = uniform_in_ball(dim_, radius_, rng);
    double clean = std::tanh(teacher_scale_ * z.head(dim_).sum() / std::sqrt(static_cast<double>(dim_)));
    double y = clean + noise_ * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    z[dim_] = std::clamp(y, -1.0, 1.0);
    return z;
  }
  nlohmann::json to_json() const override {
    return {{"kind", "tanh_data"},
            {"dim", dim_},
            {"feature_radius", radius_},
            {"teacher_scale", teacher_scale_},
            {"noise", noise_}};
  }

 private:
  int dim_;
  double radius_;
  double teacher_scale_;
  double noise_;
};

class BernoulliExamples final : public ExampleDistribution {
 public:
  explicit BernoulliExamples(double p_one) : p_one_(p_one) {
    require(p_one >= 0.0 && p_one <= 1.0, "bernoulli: p_one in [0,1]");
  }
  Example sample(std::mt19937_64& rng) const override {
    Example z(1);
    z[0] = std::bernoulli_distribution(p_one_)(rng) ? 1.0 : 0.0;
    return z;
  }
  nlohmann::json to_json() const override { return {{"kind", "bernoulli"}, {"p_one", p_one_}}; }

 private:
  double p_one_;
};

}  // namespace

DistributionPtr make_uniform_box(int dim, double half_width) {
  return std::make_shared<UniformBox>(dim, half_width);
}
DistributionPtr make_uniform_ball(int dim, double radius) {
  return std::make_shared<UniformBall>(dim, radius);
}
DistributionPtr make_logistic_data(int dim, double feature_radius, double teacher_scale,
                                   double label_noise) {
  return std::make_shared<LogisticData>(dim, feature_radius, teacher_scale, label_noise);
}
DistributionPtr make_tanh_data(int dim, double feature_radius, double teacher_scale, double noise) {
  return std::make_shared<TanhData>(dim, feature_radius, teacher_scale, noise);
}
DistributionPtr make_bernoulli_examples(double p_one) {
  return std::make_shared<BernoulliExamples>(p_one);
}

DistributionPtr make_distribution(const nlohmann::json& j) {
  const std::string kind = get_required<std::string>(j, "kind", "distribution");
  if (kind == "uniform_box") {
    check_keys(j, {"kind", "dim", "half_width"}, "distribution");
    return make_uniform_box(get_or<int>(j, "dim", 1), get_or<double>(j, "half_width", 1.0));
  }
  if (kind == "uniform_ball") {
    check_keys(j, {"kind", "dim", "radius"}, "distribution");
    return make_uniform_ball(get_or<int>(j, "dim", 1), get_or<double>(j, "radius", 1.0));
  }
  if (kind == "logistic_data") {
    check_keys(j, {"kind", "dim", "feature_radius", "teacher_scale", "label_noise"}, "distribution");
    return make_logistic_data(get_or<int>(j, "dim", 2), get_or<double>(j, "feature_radius", 1.0),
                              get_or<double>(j, "teacher_scale", 1.0),
                              get_or<double>(j, "label_noise", 0.1));
  }
  if (kind == "tanh_data") {
    check_keys(j, {"kind", "dim", "feature_radius", "teacher_scale", "noise"}, "distribution");
    return make_tanh_data(get_or<int>(j, "dim", 2), get_or<double>(j, "feature_radius", 1.0),
                          get_or<double>(j, "teacher_scale", 1.0), get_or<double>(j, "noise", 0.2));
  }
  if (kind == "bernoulli") {
    check_keys(j, {"kind", "p_one"}, "distribution");
    return make_bernoulli_examples(get_or<double>(j, "p_one", 0.5));
  }
  throw InvalidInput("distribution: unknown kind '" + kind + "'");
}

NeighborPair make_neighbors(const ExampleDistribution& dist, int n, int i, std::uint64_t seed,
                            bool identical) {
  require(n >= 1, "make_neighbors: n must be positive");
  require(i >= 1 && i <= n, "make_neighbors: differing index must lie in [1, n]");
  std::mt19937_64 rng(seed);
  NeighborPair pair;
  pair.S = dist.sample_many(n, rng);
  pair.S_prime = pair.S;
  pair.differing_index = i;
  if (!identical) pair.S_prime[static_cast<std::size_t>(i - 1)] = dist.sample(rng);
  return pair;
}

std::pair<ObjectivePtr, NeighborPair> make_hard_instance(const HardInstanceParams& params, int n) {
  require(n >= 1, "make_hard_instance: n must be positive");
  ObjectivePtr obj = make_hard_instance_objective(params);
  Example zero = Example::Zero(1);
  Example one = Example::Ones(1);
  NeighborPair pair;
  pair.S.assign(static_cast<std::size_t>(n), zero);
  pair.S_prime = pair.S;
  pair.S[0] = one;
  pair.differing_index = 1;
  return {obj, pair};
}

}  // namespace stablab
