#include "stablab/cli.hpp"
#include "stablab/bounds.hpp"
#include "stablab/dataset.hpp"
#include "stablab/format.hpp"
#include "stablab/json_util.hpp"
#include "stablab/objective.hpp"
#include "stablab/parallel.hpp"
#include "stablab/sgd.hpp"
#include "stablab/smoothness.hpp"
#include "stablab/stability.hpp"
#include "stablab/stats.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace stablab {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

json load_config(const std::string& path) {
  require(!path.empty(), "--config is required");
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("malformed JSON in '" + path + "': " + e.what());
  }
}

std::uint64_t resolve_seed(json& cfg, const Flags& f) {
  if (f.seed) cfg["seed"] = *f.seed;
  require(cfg.contains("seed") && cfg["seed"].is_number_integer() && cfg["seed"].get<std::int64_t>() >= 0,
          "config: a non-negative integer master seed is mandatory");
  return cfg["seed"].get<std::uint64_t>();
}

std::string output_prefix(const json& cfg, const Flags& f) {
  if (!f.out.empty()) return f.out;
  return get_or<std::string>(cfg, "output", "stablab");
}

void write_atomic(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    o << content;
    o.flush();
    if (!o) throw std::runtime_error("cannot write '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

SamplerSpec sampler_from(const json& cfg) {
  SamplerSpec spec;
  if (!cfg.contains("sampler")) return spec;
  const json& s = cfg["sampler"];
  check_keys(s, {"radius", "kink_fraction"}, "sampler");
  if (s.contains("radius")) spec.radius = s["radius"].get<double>();
  spec.kink_fraction = get_or<double>(s, "kink_fraction", spec.kink_fraction);
  return spec;
}

// ---------------------------------------------------------------- certify

int cmd_certify(const Flags& f, std::ostream& out, std::ostream& err) {
  json cfg = load_config(f.config);
  check_keys(cfg, {"objective", "seed", "N", "sampler", "declared", "alpha", "output"}, "certify config");
  const std::uint64_t seed = resolve_seed(cfg, f);
  ObjectivePtr obj = make_objective(get_required<json>(cfg, "objective", "certify config"));
  const int N = get_or<int>(cfg, "N", 100000);
  const SamplerSpec spec = sampler_from(cfg);
  const ConstantsRecord& c = obj->constants();

  LemmaConstants declared;
  if (cfg.contains("declared")) {
    const json& d = cfg["declared"];
    check_keys(d, {"beta", "eta", "gamma"}, "declared");
    if (d.contains("beta")) declared.beta = d["beta"].get<double>();
    if (d.contains("eta")) declared.eta = d["eta"].get<double>();
    if (d.contains("gamma")) declared.gamma = d["gamma"].get<double>();
  }
  const double beta = declared.beta.value_or(c.beta);
  const double eta = declared.eta.value_or(c.eta);
  const std::optional<double> gamma = declared.gamma ? declared.gamma : c.gamma;
  const double alpha = get_or<double>(cfg, "alpha", beta > 0.0 ? 1.0 / beta : 1.0);
  const LemmaConstants lemma{beta, eta, gamma};

  SmoothnessCertificate cert = estimate_constants(*obj, N, derive_seed(seed, 10), spec);
  const std::uint64_t pair_seed = derive_seed(seed, 11);
  std::vector<PropertyReport> reports;
  json skipped = json::array();
  reports.push_back(check_descent(*obj, beta, eta, N, pair_seed, spec));
  if (obj->convex()) {
    reports.push_back(check_cocoercive(*obj, beta, eta, N, pair_seed, spec));
  } else {
    skipped.push_back("cocoercive: family is not convex");
  }
  reports.push_back(check_update_expansiveness(*obj, alpha, ExpansionMode::general, N, pair_seed, lemma, spec));
  const bool step_ok = alpha * beta <= 1.0 + 1e-12;
  if (obj->convex() && step_ok) {
    reports.push_back(check_update_expansiveness(*obj, alpha, ExpansionMode::convex, N, pair_seed, lemma, spec));
    if (gamma && *gamma > 0.0) {
      reports.push_back(
          check_update_expansiveness(*obj, alpha, ExpansionMode::strongly, N, pair_seed, lemma, spec));
    } else {
      skipped.push_back("contractive_strongly: no gamma");
    }
  } else {
    skipped.push_back(obj->convex() ? "expansive_convex: alpha > 1/beta" : "expansive_convex: family is not convex");
  }

  bool passed = true;
  json jr = json::array();
  for (const auto& r : reports) {
    passed = passed && r.passed();
    jr.push_back(to_json(r));
  }
  json doc = {{"config", cfg},
              {"constants", to_json(c)},
              {"declared", {{"beta", beta}, {"eta", eta}, {"gamma", gamma ? json(*gamma) : json(nullptr)},
                            {"alpha", alpha}}},
              {"certificate", to_json(cert)},
              {"reports", jr},
              {"skipped", skipped},
              {"passed", passed},
              {"timestamp", timestamp()}};
  const std::string path = output_prefix(cfg, f) + ".certificate.json";
  write_atomic(path, doc.dump(2) + "\n");
  out << path << "\n";
  if (!passed) {
    err << "property violations found; report: " << path << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- stability

struct Experiment {
  json cfg;
  ObjectivePtr obj;
  DistributionPtr dist;
  ScheduleSpec schedule;
  SamplingScheme scheme = SamplingScheme::with_replacement;
  int n = 0;
  int T = 0;
  int M = 0;
  bool swa = true;
  int record_every = 1;
  UasMode mode = UasMode::randomized;
  bool identical = false;
  std::optional<int> N_test;
  bool opt_gap = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool hard = false;
};

Experiment parse_experiment(const json& cfg, std::uint64_t seed, int jobs) {
  check_keys(cfg, {"objective", "distribution", "schedule", "n", "T", "M", "scheme", "swa", "seed", "record_every",
                   "mode", "identical", "N_test", "opt_gap", "output", "grid"},
             "experiment config");
  Experiment e;
  e.cfg = cfg;
  e.seed = seed;
  e.jobs = jobs;
  const json& objective = get_required<json>(cfg, "objective", "experiment config");
  e.obj = make_objective(objective);
  e.hard = e.obj->family() == FamilyId::hard_instance;
  if (!e.hard) e.dist = make_distribution(get_required<json>(cfg, "distribution", "experiment config"));
  e.schedule = schedule_from_json(get_required<json>(cfg, "schedule", "experiment config"), e.obj->constants().beta);
  e.n = get_required<int>(cfg, "n", "experiment config");
  e.T = get_required<int>(cfg, "T", "experiment config");
  e.M = get_or<int>(cfg, "M", 100);
  e.scheme = scheme_from_string(get_or<std::string>(cfg, "scheme", e.hard ? "full_batch" : "with_replacement"));
  e.swa = get_or<bool>(cfg, "swa", true);
  e.record_every = get_or<int>(cfg, "record_every", 1);
  const std::string mode = get_or<std::string>(cfg, "mode", "randomized");
  require(mode == "randomized" || mode == "worst_case", "experiment config: mode is randomized or worst_case");
  e.mode = mode == "randomized" ? UasMode::randomized : UasMode::worst_case;
  e.identical = get_or<bool>(cfg, "identical", false);
  if (cfg.contains("N_test")) e.N_test = cfg["N_test"].get<int>();
  e.opt_gap = get_or<bool>(cfg, "opt_gap", false);
  require(!e.opt_gap || e.N_test, "experiment config: opt_gap needs N_test");
  require(e.n >= 1 && e.T >= 0 && e.record_every >= 1, "experiment config: need n >= 1, T >= 0, record_every >= 1");
  require(e.hard || e.M >= 2, "experiment config: M must be >= 2");
  return e;
}

struct Outcome {
  StabilityReport report;
  BoundOverlay overlay;
  std::optional<GapEstimate> gap;
  json summary;
  bool violation = false;
};

Outcome run_standard(const Experiment& e) {
  Outcome o;
  UasOptions uopt;
  uopt.mode = e.mode;
  uopt.record_every = e.record_every;
  uopt.jobs = e.jobs;
  uopt.identical = e.identical;
  o.report = measure_uas(*e.obj, *e.dist, e.n, e.schedule, e.scheme, e.T, e.M, e.seed, uopt);
  const ConstantsRecord& c = e.obj->constants();
  o.overlay = bound_overlay(c, e.obj->convex(), e.n, e.schedule, o.report.t, o.report.alphas);
  if (!e.swa) std::fill(o.report.delta_swa_mean.begin(), o.report.delta_swa_mean.end(), kNaN);
  if (e.N_test) {
    GapOptions gopt;
    gopt.jobs = e.jobs;
    gopt.opt_gap = e.opt_gap;
    o.gap = estimate_gaps(*e.obj, *e.dist, e.n, e.schedule, e.scheme, e.T, e.M, *e.N_test, e.seed, gopt);
  }

  const double sum_alpha = sum_of(o.report.alphas);
  const double dT = o.report.delta_mean.back();
  const double ciT = o.report.delta_hi.back() - dT;
  json s;
  s["constants"] = to_json(c);
  s["convex"] = e.obj->convex();
  s["stability"] = to_json(o.report);
  json b;
  b["sum_alpha"] = sum_alpha;
  if (e.obj->convex()) {
    const double ub = ub_convex(c.L, c.eta, e.n, sum_alpha);
    const double us = ub_swa(c.L, c.eta, e.n, sum_alpha);
    b["ub_convex"] = ub;
    b["ub_swa"] = us;
    s["mean_delta_T_le_ub"] = c.L > 0.0 && dT <= ub / c.L + 2.0 * ciT;
    if (e.swa) {
      const double sT = o.report.delta_swa_mean.back();
      const double sci = o.report.delta_swa_hi.back() - sT;
      s["swa_delta_T_le_ub"] = c.L > 0.0 && sT <= us / c.L + 2.0 * sci;
    }
    if (o.gap) s["gen_gap_le_ub"] = std::abs(o.gap->gen_gap) <= ub + 2.0 * o.gap->gen_gap_ci;
  } else {
    s["mean_delta_T_le_ub"] = nullptr;
  }
  if (e.schedule.kind == ScheduleKind::fixed && !e.schedule.cap) {
    b["lb_uas"] = lb_uas(c.eta, c.L, e.schedule.alpha, e.T, e.n);
  }
  s["bounds"] = b;
  if (o.gap) s["gaps"] = to_json(*o.gap);
  o.summary = s;
  o.violation = o.report.path_certified && o.report.path_violations > 0;
  return o;
}

struct HardOutcome {
  CoupledRun run;
  std::vector<double> closed_form;  // ‖θ^t(S)‖ from the closed form, NaN beyond the horizon
  std::vector<double> witness;
  bool recursion_match = false;
  double max_relative_error = 0.0;
  bool witness_holds = false;
};

HardOutcome run_hard_instance(const HardInstanceParams& params, int n, const ScheduleSpec& schedule,
                              SamplingScheme scheme, int T, std::uint64_t seed, int record_every) {
  require(schedule.kind == ScheduleKind::fixed && !schedule.cap, "hard instance: needs a fixed, uncapped schedule");
  auto [obj, pair] = make_hard_instance(params, n);
  CoupledOptions copt;
  copt.record_every = record_every;
  HardOutcome h;
  h.run = coupled_run(*obj, pair, schedule, scheme, T, derive_seed(seed, streams::index), copt);
  const double alpha = schedule.alpha;
  const double factor = params.eta * alpha * (n - 1) / static_cast<double>(n);
  h.recursion_match = scheme == SamplingScheme::full_batch;
  for (std::size_t k = 0; k < h.run.t.size(); ++k) {
    const int t = h.run.t[k];
    h.witness.push_back(t >= 1 ? factor * std::sqrt(static_cast<double>(t - 1)) : 0.0);
    if (t > params.horizon) {
      h.closed_form.push_back(kNaN);
      continue;
    }
    const double expected = hard_instance_closed_form(params, n, alpha, t).norm();
    h.closed_form.push_back(expected);
    const double err = std::abs(h.run.delta[k] - expected);
    const double rel = expected > 0.0 ? err / expected : err;
    h.max_relative_error = std::max(h.max_relative_error, rel);
  }
  h.recursion_match = h.recursion_match && h.max_relative_error <= 1e-10;
  h.witness_holds = h.run.delta.back() + 1e-12 >= h.witness.back();
  return h;
}

Outcome run_hard(const Experiment& e) {
  const HardInstanceParams params = hard_instance_params_from_json(e.cfg["objective"]);
  HardOutcome h = run_hard_instance(params, e.n, e.schedule, e.scheme, e.T, e.seed, e.record_every);
  Outcome o;
  StabilityReport& r = o.report;
  r.t = h.run.t;
  r.delta_mean = h.run.delta;
  r.delta_lo = h.run.delta;
  r.delta_hi = h.run.delta;
  r.delta_swa_mean = h.run.delta_swa;
  r.delta_swa_lo = h.run.delta_swa;
  r.delta_swa_hi = h.run.delta_swa;
  r.final_deltas = {h.run.delta.back()};
  r.final_swa_deltas = {h.run.delta_swa.back()};
  r.alphas = h.run.alphas;
  r.replicates = 1;
  r.path_certified = h.run.path_certified;
  r.path_violations = h.run.path_violations;
  r.worst_path_slack = h.run.worst_path_slack;
  if (!e.swa) std::fill(r.delta_swa_mean.begin(), r.delta_swa_mean.end(), kNaN);
  o.overlay = bound_overlay(e.obj->constants(), e.obj->convex(), e.n, e.schedule, r.t, r.alphas);
  o.overlay.lb = h.witness;
  json s;
  s["constants"] = to_json(e.obj->constants());
  s["convex"] = true;
  s["stability"] = to_json(r);
  s["recursion_match"] = h.recursion_match;
  s["recursion_max_relative_error"] = h.max_relative_error;
  s["witness"] = {{"delta_T", h.run.delta.back()}, {"lower", h.witness.back()}, {"holds", h.witness_holds}};
  s["mean_delta_T_le_ub"] = nullptr;
  o.summary = s;
  o.violation = !h.recursion_match || (r.path_certified && r.path_violations > 0);
  return o;
}

int cmd_stability(const Flags& f, std::ostream& out, std::ostream& err) {
  json cfg = load_config(f.config);
  require(!cfg.contains("grid"), "stability config: 'grid' belongs to sweep");
  const std::uint64_t seed = resolve_seed(cfg, f);
  Experiment e = parse_experiment(cfg, seed, resolve_jobs(f.jobs));
  Outcome o = e.hard ? run_hard(e) : run_standard(e);
  std::ostringstream csv;
  write_stability_csv(o.report, o.overlay, o.gap, csv);
  const std::string prefix = output_prefix(cfg, f);
  json summary = o.summary;
  summary["config"] = cfg;
  summary["timestamp"] = timestamp();
  write_atomic(prefix + ".csv", csv.str());
  write_atomic(prefix + ".summary.json", summary.dump(2) + "\n");
  out << prefix << ".csv\n" << prefix << ".summary.json\n";
  if (o.violation) {
    err << "certificate or recursion check failed; see " << prefix << ".summary.json\n";
    return kExitViolation;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream&) {
  json cfg = load_config(f.config);
  const std::uint64_t seed = resolve_seed(cfg, f);
  const json& grid = get_required<json>(cfg, "grid", "sweep config");
  check_keys(grid, {"epsilon", "T"}, "grid");
  require(grid.size() == 1, "sweep config: grid takes exactly one of epsilon, T");
  const std::string param = grid.begin().key();
  const std::vector<double> values = grid.begin().value().get<std::vector<double>>();
  require(!values.empty(), "sweep config: empty grid");
  const int jobs = resolve_jobs(f.jobs);

  std::ostringstream csv;
  csv << "grid,value,replicate,delta_T,delta_swa_T,gen_gap\n";
  json points = json::array();
  std::vector<double> point_gaps;
  for (double v : values) {
    json point = cfg;
    point.erase("grid");
    if (param == "epsilon") {
      json& objective = point["objective"];
      require(objective.is_object(), "sweep config: objective missing");
      if (!objective.contains("adversarial") || objective["adversarial"].is_null()) objective["adversarial"] = json::object();
      objective["adversarial"]["epsilon"] = v;
    } else {
      require(v >= 0.0 && v == std::floor(v), "sweep config: T grid values must be whole numbers");
      point["T"] = static_cast<int>(v);
    }
    if (!point.contains("N_test")) point["N_test"] = 1000;
    Experiment e = parse_experiment(point, seed, jobs);
    if (e.hard) throw Unsupported("sweep does not apply to the hard instance; use lowerbound");
    Outcome o = run_standard(e);
    for (int r = 0; r < e.M; ++r) {
      csv << param << ',' << fmt_double(v) << ',' << r << ','
          << fmt_double(o.report.final_deltas[static_cast<std::size_t>(r)]) << ','
          << fmt_double(e.swa ? o.report.final_swa_deltas[static_cast<std::size_t>(r)] : kNaN) << ','
          << fmt_double(o.gap->gen_gaps[static_cast<std::size_t>(r)]) << '\n';
    }
    point_gaps.push_back(o.gap->gen_gap);
    points.push_back({{"value", v},
                      {"delta_T_mean", o.report.delta_mean.back()},
                      {"delta_T_ci", o.report.delta_hi.back() - o.report.delta_mean.back()},
                      {"gen_gap", o.gap->gen_gap},
                      {"gen_gap_ci", o.gap->gen_gap_ci},
                      {"mean_delta_T_le_ub", o.summary["mean_delta_T_le_ub"]},
                      {"bounds", o.summary["bounds"]}});
  }
  json summary = {{"config", cfg}, {"grid", param}, {"points", points}, {"timestamp", timestamp()}};
  summary["gen_gap_spearman"] = values.size() >= 2 ? json(spearman(values, point_gaps)) : json(nullptr);
  const std::string prefix = output_prefix(cfg, f);
  write_atomic(prefix + ".sweep.csv", csv.str());
  write_atomic(prefix + ".sweep.summary.json", summary.dump(2) + "\n");
  out << prefix << ".sweep.csv\n" << prefix << ".sweep.summary.json\n";
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

json parse_set_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

std::vector<double> parse_series(const json& series) {
  check_keys(series, {"T"}, "series");
  const json& t = get_required<json>(series, "T", "series");
  if (t.is_array()) return t.get<std::vector<double>>();
  check_keys(t, {"from", "to", "step"}, "series.T");
  const double from = get_required<double>(t, "from", "series.T");
  const double to = get_required<double>(t, "to", "series.T");
  const double step = get_or<double>(t, "step", 1.0);
  require(step > 0.0 && to >= from, "series.T: need step > 0 and to >= from");
  std::vector<double> out;
  for (long k = 0;; ++k) {
    double v = from + static_cast<double>(k) * step;
    if (v > to + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

int cmd_bounds(const Flags& f, const std::string& id_arg, const std::vector<std::string>& sets,
               const std::string& series_arg, std::ostream& out) {
  json cfg = json::object();
  if (!f.config.empty()) {
    cfg = load_config(f.config);
    check_keys(cfg, {"bound", "inputs", "series", "output"}, "bounds config");
  }
  std::string id = id_arg.empty() ? get_or<std::string>(cfg, "bound", "") : id_arg;
  require(!id.empty(), "bounds: a bound id is required (one of ub_convex, ub_swa, tradeoff_fixed, ...)");
  json inputs = cfg.contains("inputs") ? cfg["inputs"] : json::object();
  for (const auto& s : sets) {
    auto eq = s.find('=');
    require(eq != std::string::npos && eq > 0, "bounds: --set expects key=value, got '" + s + "'");
    inputs[s.substr(0, eq)] = parse_set_value(s.substr(eq + 1));
  }
  std::optional<std::vector<double>> series;
  if (!series_arg.empty()) {
    double a = 0, b = 0, c = 1;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(series_arg);
    in >> a >> sep1 >> b;
    if (in >> sep2) in >> c;
    require(sep1 == ':' && (sep2 == 0 || sep2 == ':'), "bounds: --series expects from:to[:step]");
    series = parse_series({{"T", {{"from", a}, {"to", b}, {"step", c}}}});
  } else if (cfg.contains("series")) {
    series = parse_series(cfg["series"]);
  }
  const std::string prefix = output_prefix(cfg, f);

  if (!series) {
    json doc = to_json(evaluate_bound(id, inputs));
    out << doc.dump(2) << "\n";
    if (!f.out.empty() || cfg.contains("output")) write_atomic(prefix + ".bounds.json", doc.dump(2) + "\n");
    return kExitOk;
  }
  require(!series->empty(), "bounds: empty series");
  std::ostringstream csv;
  std::vector<BoundReport> rows;
  for (double T : *series) {
    json in = inputs;
    in["T"] = T;
    rows.push_back(evaluate_bound(id, in));
  }
  csv << "T,value";
  for (const auto& [name, v] : rows.front().terms) csv << ',' << name;
  csv << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    csv << fmt_double((*series)[k]) << ',' << fmt_double(rows[k].value);
    for (const auto& [name, v] : rows[k].terms) csv << ',' << fmt_double(v);
    csv << '\n';
  }
  write_atomic(prefix + ".series.csv", csv.str());
  out << prefix << ".series.csv\n";
  return kExitOk;
}

// ---------------------------------------------------------------- lowerbound

int cmd_lowerbound(const Flags& f, std::ostream& out, std::ostream& err) {
  json cfg = load_config(f.config);
  check_keys(cfg, {"horizon", "dim", "n", "eta", "K", "v", "alpha", "T", "seed", "output"}, "lowerbound config");
  const std::uint64_t seed = resolve_seed(cfg, f);
  HardInstanceParams p;
  p.horizon = get_required<int>(cfg, "horizon", "lowerbound config");
  p.d = get_or<int>(cfg, "dim", p.horizon);
  p.eta = get_or<double>(cfg, "eta", 1.0);
  p.K = get_or<double>(cfg, "K", 1.0);
  p.v = get_or<double>(cfg, "v", 0.0);
  const int n = get_required<int>(cfg, "n", "lowerbound config");
  const double alpha = get_required<double>(cfg, "alpha", "lowerbound config");
  const int T = get_or<int>(cfg, "T", p.horizon);
  HardOutcome h = run_hard_instance(p, n, ScheduleSpec::fixed(alpha), SamplingScheme::full_batch, T, seed, 1);

  std::ostringstream csv;
  csv << "t,delta,closed_form,witness\n";
  for (std::size_t k = 0; k < h.run.t.size(); ++k) {
    csv << h.run.t[k] << ',' << fmt_double(h.run.delta[k]) << ',' << fmt_double(h.closed_form[k]) << ','
        << fmt_double(h.witness[k]) << '\n';
  }
  json summary = {{"config", cfg},
                  {"delta_T", h.run.delta.back()},
                  {"closed_form_T", finite_or_null(h.closed_form.back())},
                  {"recursion_match", h.recursion_match},
                  {"recursion_max_relative_error", h.max_relative_error},
                  {"witness", {{"lower", h.witness.back()}, {"holds", h.witness_holds}}},
                  {"lb_uas", lb_uas(p.eta, std::max(p.eta, std::sqrt(static_cast<double>(p.horizon)) / p.K), alpha, T, n)},
                  {"timestamp", timestamp()}};
  const std::string prefix = output_prefix(cfg, f);
  write_atomic(prefix + ".lowerbound.csv", csv.str());
  write_atomic(prefix + ".lowerbound.summary.json", summary.dump(2) + "\n");
  out << prefix << ".lowerbound.csv\n" << prefix << ".lowerbound.summary.json\n";
  if (!h.recursion_match) {
    err << "trajectory does not match the closed-form recursion\n";
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability lab for SGD on approximately smooth objectives", "stablab"};
  app.require_subcommand(1);

  Flags flags;
  std::uint64_t seed_value = 0;
  int jobs_value = 0;
  std::string bound_id;
  std::vector<std::string> sets;
  std::string series;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", flags.config, "JSON config file");
    if (needs_config) c->required();
    sub->add_option("--out", flags.out, "output path prefix");
    sub->add_option("--seed", seed_value, "master seed (overrides the config)");
    sub->add_option("--jobs", jobs_value, "worker threads (fallback: STABLAB_JOBS)")->check(CLI::PositiveNumber);
  };
  auto* certify = app.add_subcommand("certify", "estimate (L, beta, eta) and check the smoothness lemmas");
  auto* stability = app.add_subcommand("stability", "coupled SGD runs on neighboring datasets");
  auto* sweep = app.add_subcommand("sweep", "stability and generalization gap over an epsilon or T grid");
  auto* bounds = app.add_subcommand("bounds", "evaluate a closed-form bound");
  auto* lowerbound = app.add_subcommand("lowerbound", "run the lower-bound instance against its recursion");
  common(certify, true);
  common(stability, true);
  common(sweep, true);
  common(bounds, false);
  common(lowerbound, true);
  bounds->add_option("id", bound_id, "bound id");
  bounds->add_option("--set", sets, "input as key=value (value parsed as JSON when possible)");
  bounds->add_option("--series", series, "evaluate over T = from:to[:step] and write CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->get_option("--seed")->count() > 0) flags.seed = seed_value;
    if (sub->get_option("--jobs")->count() > 0) flags.jobs = jobs_value;
  }

  try {
    if (certify->parsed()) return cmd_certify(flags, out, err);
    if (stability->parsed()) return cmd_stability(flags, out, err);
    if (sweep->parsed()) return cmd_sweep(flags, out, err);
    if (bounds->parsed()) return cmd_bounds(flags, bound_id, sets, series, out);
    if (lowerbound->parsed()) return cmd_lowerbound(flags, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Unsupported& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad config value: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace stablab
