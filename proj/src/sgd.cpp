#include "stablab/sgd.hpp"
#include "stablab/format.hpp"
#include "stablab/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <ostream>

namespace stablab {

ScheduleSpec ScheduleSpec::fixed(double alpha) {
  ScheduleSpec s;
  s.kind = ScheduleKind::fixed;
  s.alpha = alpha;
  return s;
}

ScheduleSpec ScheduleSpec::diminishing(double c) {
  ScheduleSpec s;
  s.kind = ScheduleKind::diminishing;
  s.c = c;
  return s;
}

ScheduleSpec ScheduleSpec::cyclic(double peak, int t_peak, int horizon) {
  ScheduleSpec s;
  s.kind = ScheduleKind::cyclic;
  s.peak = peak;
  s.t_peak = t_peak;
  s.horizon = horizon;
  return s;
}

ScheduleSpec ScheduleSpec::piecewise(std::vector<std::pair<int, double>> pieces) {
  ScheduleSpec s;
  s.kind = ScheduleKind::piecewise;
  s.pieces = std::move(pieces);
  return s;
}

void ScheduleSpec::validate() const {
  switch (kind) {
    case ScheduleKind::fixed: require(alpha >= 0.0, "schedule: alpha must be >= 0"); break;
    case ScheduleKind::diminishing: require(c >= 0.0, "schedule: c must be >= 0"); break;
    case ScheduleKind::cyclic:
      require(peak >= 0.0, "schedule: peak must be >= 0");
      require(horizon >= 1 && t_peak >= 1 && t_peak <= horizon,
              "schedule: cyclic needs 1 <= t_peak <= T");
      break;
    case ScheduleKind::piecewise:
      require(!pieces.empty() && pieces.front().first == 1,
              "schedule: piecewise must start at t = 1");
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        require(pieces[k].second >= 0.0, "schedule: piecewise alpha must be >= 0");
        if (k > 0) require(pieces[k].first > pieces[k - 1].first, "schedule: breaks must increase");
      }
      break;
  }
  if (cap) require(*cap >= 0.0, "schedule: cap must be >= 0");
}

double schedule_alpha(const ScheduleSpec& s, int t) {
  require(t >= 1, "schedule: t must be >= 1");
  double a = 0.0;
  switch (s.kind) {
    case ScheduleKind::fixed: a = s.alpha; break;
    case ScheduleKind::diminishing: a = s.c / t; break;
    case ScheduleKind::cyclic:
      require(t <= s.horizon, "schedule: t beyond the cyclic horizon");
      if (t <= s.t_peak) {
        a = s.peak * static_cast<double>(t) / s.t_peak;
      } else {
        a = s.peak * static_cast<double>(s.horizon - t) / (s.horizon - s.t_peak);
      }
      break;
    case ScheduleKind::piecewise: {
      auto it = std::upper_bound(s.pieces.begin(), s.pieces.end(), t,
                                 [](int value, const auto& piece) { return value < piece.first; });
      a = std::prev(it)->second;
      break;
    }
  }
  if (s.cap) a = std::min(a, *s.cap);
  return a;
}

std::vector<double> schedule_series(const ScheduleSpec& s, int T) {
  std::vector<double> out(static_cast<std::size_t>(std::max(T, 0)));
  for (int t = 1; t <= T; ++t) out[static_cast<std::size_t>(t - 1)] = schedule_alpha(s, t);
  return out;
}

ScheduleSpec schedule_from_json(const nlohmann::json& j, std::optional<double> beta_default) {
  const std::string kind = get_required<std::string>(j, "kind", "schedule");
  ScheduleSpec s;
  if (kind == "fixed") {
    check_keys(j, {"kind", "alpha", "cap"}, "schedule");
    s = ScheduleSpec::fixed(get_required<double>(j, "alpha", "schedule"));
  } else if (kind == "diminishing") {
    check_keys(j, {"kind", "c", "cap"}, "schedule");
    if (j.contains("c")) {
      s = ScheduleSpec::diminishing(j["c"].get<double>());
    } else {
      require(beta_default.has_value() && *beta_default > 0.0,
              "schedule: diminishing needs c or a positive beta");
      s = ScheduleSpec::diminishing(1.0 / *beta_default);
    }
  } else if (kind == "cyclic") {
    check_keys(j, {"kind", "peak", "t_peak", "horizon", "cap"}, "schedule");
    s = ScheduleSpec::cyclic(get_required<double>(j, "peak", "schedule"),
                             get_required<int>(j, "t_peak", "schedule"),
                             get_required<int>(j, "horizon", "schedule"));
  } else if (kind == "piecewise") {
    check_keys(j, {"kind", "pieces", "cap"}, "schedule");
    std::vector<std::pair<int, double>> pieces;
    for (const auto& p : get_required<nlohmann::json>(j, "pieces", "schedule")) {
      require(p.is_array() && p.size() == 2, "schedule: pieces are [t_break, alpha] pairs");
      pieces.emplace_back(p[0].get<int>(), p[1].get<double>());
    }
    s = ScheduleSpec::piecewise(std::move(pieces));
  } else {
    throw InvalidInput("schedule: unknown kind '" + kind + "'");
  }
  if (j.contains("cap") && !j["cap"].is_null()) s.cap = j["cap"].get<double>();
  s.validate();
  return s;
}

nlohmann::json to_json(const ScheduleSpec& s) {
  nlohmann::json j;
  switch (s.kind) {
    case ScheduleKind::fixed: j = {{"kind", "fixed"}, {"alpha", s.alpha}}; break;
    case ScheduleKind::diminishing: j = {{"kind", "diminishing"}, {"c", s.c}}; break;
    case ScheduleKind::cyclic:
      j = {{"kind", "cyclic"}, {"peak", s.peak}, {"t_peak", s.t_peak}, {"horizon", s.horizon}};
      break;
    case ScheduleKind::piecewise: {
      nlohmann::json pieces = nlohmann::json::array();
      for (const auto& [t, a] : s.pieces) pieces.push_back({t, a});
      j = {{"kind", "piecewise"}, {"pieces", pieces}};
      break;
    }
  }
  if (s.cap) j["cap"] = *s.cap;
  return j;
}

std::string to_string(SamplingScheme scheme) {
  switch (scheme) {
    case SamplingScheme::with_replacement: return "with_replacement";
    case SamplingScheme::fixed_permutation: return "fixed_permutation";
    case SamplingScheme::full_batch: return "full_batch";
  }
  return "unknown";
}

SamplingScheme scheme_from_string(const std::string& name) {
  if (name == "with_replacement") return SamplingScheme::with_replacement;
  if (name == "fixed_permutation") return SamplingScheme::fixed_permutation;
  if (name == "full_batch") return SamplingScheme::full_batch;
  throw InvalidInput("unknown sampling scheme '" + name + "'");
}

IndexStream::IndexStream(SamplingScheme scheme, int n, std::uint64_t seed)
    : scheme_(scheme), n_(n), rng_(seed) {
  require(n >= 1, "index stream: empty dataset");
  if (scheme_ == SamplingScheme::fixed_permutation) {
    permutation_.resize(static_cast<std::size_t>(n));
    std::iota(permutation_.begin(), permutation_.end(), 0);
    std::shuffle(permutation_.begin(), permutation_.end(), rng_);
  }
}

int IndexStream::next() {
  switch (scheme_) {
    case SamplingScheme::with_replacement:
      return std::uniform_int_distribution<int>(0, n_ - 1)(rng_);
    case SamplingScheme::fixed_permutation: {
      int i = permutation_[cursor_];
      cursor_ = (cursor_ + 1) % permutation_.size();
      return i;
    }
    case SamplingScheme::full_batch: return -1;
  }
  return -1;
}

Vector project_ball(const Vector& theta, double radius) {
  if (!std::isfinite(radius)) return theta;
  double norm = theta.norm();
  if (norm <= radius) return theta;
  return theta * (radius / norm);
}

double empirical_risk(const Objective& obj, const Dataset& S, const Vector& theta) {
  require(!S.empty(), "empirical risk of an empty dataset");
  double total = 0.0;
  for (const auto& z : S) total += obj.value(theta, z);
  return total / static_cast<double>(S.size());
}

Vector empirical_gradient(const Objective& obj, const Dataset& S, const Vector& theta) {
  require(!S.empty(), "empirical gradient of an empty dataset");
  Vector total = Vector::Zero(theta.size());
  for (const auto& z : S) total += obj.subgradient(theta, z);
  return total / static_cast<double>(S.size());
}

StepResult sgd_step(const Objective& obj, const Dataset& S, const Vector& theta, int index,
                    double alpha, double radius) {
  StepResult out;
  Vector direction;
  if (index < 0) {
    out.loss = empirical_risk(obj, S, theta);
    direction = empirical_gradient(obj, S, theta);
  } else {
    const Example& z = S[static_cast<std::size_t>(index)];
    out.loss = obj.value(theta, z);
    direction = obj.subgradient(theta, z);
  }
  out.grad_norm = direction.norm();
  out.theta = project_ball(theta - alpha * direction, radius);
  return out;
}

TrajectoryRecord run(const Objective& obj, const Dataset& S, const ScheduleSpec& schedule,
                     SamplingScheme scheme, int T, std::uint64_t seed, const RunOptions& options) {
  require(!S.empty(), "run: empty dataset");
  require(T >= 0, "run: T must be >= 0");
  schedule.validate();
  const double radius = options.radius.value_or(obj.domain_radius());
  require(radius <= obj.domain_radius(), "run: projection radius exceeds the objective domain");

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.scheme = scheme;
  rec.steps.reserve(static_cast<std::size_t>(T));
  Vector theta = options.theta0.value_or(Vector::Zero(obj.param_dim()));
  require(theta.size() == obj.param_dim(), "run: theta0 has the wrong dimension");
  require(obj.in_domain(theta), "run: theta0 outside the domain ball");

  Vector swa_sum = Vector::Zero(theta.size());
  auto observe = [&](int t, const Vector& current) {
    if (options.record_iterates) rec.iterates.push_back(current);
    if (options.track_risk) {
      double risk = empirical_risk(obj, S, current);
      if (!rec.best || risk < rec.best->risk) rec.best = BestIterate{t, risk, current};
    }
  };
  observe(0, theta);

  IndexStream stream(scheme, static_cast<int>(S.size()), seed);
  for (int t = 1; t <= T; ++t) {
    const double alpha = schedule_alpha(schedule, t);
    const int index = stream.next();
    StepResult step = sgd_step(obj, S, theta, index, alpha, radius);
    rec.steps.push_back({t, index + 1, alpha, step.loss, step.grad_norm});
    theta = std::move(step.theta);
    if (options.swa) swa_sum += theta;
    observe(t, theta);
  }
  rec.final_theta = theta;
  if (options.swa) {
    rec.swa_average = T > 0 ? Vector(swa_sum / static_cast<double>(T)) : theta;
  }
  return rec;
}

double tstar(double D, double alpha, double L, double eta, int n) {
  require(D > 0.0 && alpha > 0.0 && L > 0.0 && eta >= 0.0 && n >= 1,
          "tstar: D, alpha, L must be positive, eta >= 0, n >= 1");
  double denom = alpha * std::sqrt(L * eta + 2.0 * L * L / n);
  require(denom > 0.0, "tstar: zero denominator");
  return D / denom;
}

std::string theta_digest(const Vector& theta) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    unsigned char bytes[sizeof(double)];
    double v = theta[k];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& out) {
  out << "t,i_t,alpha,loss,grad_norm\n";
  for (const auto& s : rec.steps) {
    out << s.t << ',' << s.index << ',' << fmt_double(s.alpha) << ',' << fmt_double(s.loss) << ','
        << fmt_double(s.grad_norm) << '\n';
  }
  nlohmann::json footer = {{"final_theta_digest", theta_digest(rec.final_theta)},
                           {"final_theta_norm", rec.final_theta.norm()},
                           {"seed", rec.seed},
                           {"scheme", to_string(rec.scheme)},
                           {"steps", rec.steps.size()}};
  if (rec.swa_average) footer["swa_digest"] = theta_digest(*rec.swa_average);
  out << "# " << footer.dump() << '\n';
}

}  // namespace stablab
