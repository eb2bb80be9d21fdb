#pragma once

// Batch orchestration behind the command-line tool: JSON instance
// configurations in, JSON reports out.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bethekit/classify.hpp"
#include "bethekit/completeness.hpp"
#include "bethekit/error.hpp"
#include "bethekit/identities.hpp"
#include "bethekit/model.hpp"
#include "bethekit/polysolve.hpp"

namespace bethekit {

inline constexpr const char* kToolName = "bethekit";
inline constexpr const char* kToolVersion = "1.0.0";

/// Schema violation in a configuration document. The message starts with
/// the offending field path (or the parser's line/column).
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

enum class Task { solve, classify, identities, sumrules, count };

inline const char* to_string(Task t) {
  switch (t) {
    case Task::solve: return "solve";
    case Task::classify: return "classify";
    case Task::identities: return "identities";
    case Task::sumrules: return "sumrules";
    case Task::count: return "count";
  }
  return "?";
}

struct InstanceConfig {
  Family family = Family::xxx;
  std::vector<int> two_ell;
  std::vector<Complex> z;
  Complex mu;
  Complex gamma;
  int k = 0;
  std::vector<Task> tasks;
  SolverConfig solver;
  std::vector<int> identity_shifts{-2, -1, 0, 1, 2};
  std::vector<int> sumrule_ms{0};

  ModelSpec model() const {
    return family == Family::xxx ? ModelSpec::xxx(SpinList(two_ell), z, mu) : ModelSpec::xxz(SpinList(two_ell), z, mu, gamma);
  }
  Sector sector() const { return Sector(SpinList(two_ell), k); }
  bool has(Task t) const { return std::find(tasks.begin(), tasks.end(), t) != tasks.end(); }
};

struct RunConfig {
  std::vector<InstanceConfig> instances;
};

struct Thresholds {
  double identity = 1e-8;
  double sumrule = 1e-10;
};

struct RunOptions {
  std::string command = "run";
  /// Replaces every instance's task list when set.
  std::optional<std::vector<Task>> tasks;
  Thresholds thresholds;
  int threads = 1;
};

struct RunResult {
  nlohmann::json report;
  bool pass = true;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline Complex parse_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    config_fail(path, "expected a complex number [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline int parse_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer");
  return j.get<int>();
}

inline double parse_positive(const json& j, const std::string& path) {
  if (!j.is_number() || !(j.get<double>() > 0.0)) config_fail(path, "expected a positive number");
  return j.get<double>();
}

inline std::vector<int> parse_int_array(const json& j, const std::string& path) {
  if (!j.is_array()) config_fail(path, "expected an integer array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Task parse_task(const json& j, const std::string& path) {
  if (!j.is_string()) config_fail(path, "expected a task name");
  const auto s = j.get<std::string>();
  for (Task t : {Task::solve, Task::classify, Task::identities, Task::sumrules, Task::count})
    if (s == to_string(t)) return t;
  config_fail(path, "unknown task \"" + s + "\" (expected solve, classify, identities, sumrules or count)");
}

inline void check_task_dependencies(const InstanceConfig& c, const std::string& path) {
  if (c.tasks.empty()) config_fail(path + "tasks", "at least one task is required");
  for (Task t : {Task::classify, Task::identities, Task::sumrules})
    if (c.has(t) && !c.has(Task::solve))
      config_fail(path + "tasks", std::string("task \"") + to_string(t) + "\" requires task \"solve\"");
}

inline InstanceConfig parse_instance(const json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path.empty() ? "<root>" : path, "expected an object");
  static const std::vector<std::string> known{"family", "two_ell",         "z",          "mu",  "gamma", "k",
                                              "tasks",  "solver",          "identity_shifts", "sumrule_ms", "seed"};
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) config_fail(path + item.key(), "unknown key");
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) config_fail(path + key, "missing required key");
    return j.at(key);
  };

  InstanceConfig c;
  const json& fam = require("family");
  if (fam == "xxx")
    c.family = Family::xxx;
  else if (fam == "xxz")
    c.family = Family::xxz;
  else
    config_fail(path + "family", "expected \"xxx\" or \"xxz\"");

  c.two_ell = parse_int_array(require("two_ell"), path + "two_ell");
  if (c.two_ell.empty()) config_fail(path + "two_ell", "at least one site is required");
  for (std::size_t i = 0; i < c.two_ell.size(); ++i)
    if (c.two_ell[i] < 1) config_fail(path + "two_ell[" + std::to_string(i) + "]", "site spins must satisfy 2*ell >= 1");

  const json& z = require("z");
  if (!z.is_array()) config_fail(path + "z", "expected an array of [re, im]");
  for (std::size_t i = 0; i < z.size(); ++i) c.z.push_back(parse_complex(z[i], path + "z[" + std::to_string(i) + "]"));
  if (c.z.size() != c.two_ell.size())
    config_fail(path + "z", "expected " + std::to_string(c.two_ell.size()) + " entries to match two_ell");

  c.mu = parse_complex(require("mu"), path + "mu");
  if (c.family == Family::xxz)
    c.gamma = parse_complex(require("gamma"), path + "gamma");
  else if (j.contains("gamma"))
    config_fail(path + "gamma", "only valid for family \"xxz\"");

  c.k = parse_int(require("k"), path + "k");
  if (c.k < 0) config_fail(path + "k", "must be nonnegative");

  const json& tasks = require("tasks");
  if (!tasks.is_array()) config_fail(path + "tasks", "expected an array of task names");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task t = parse_task(tasks[i], path + "tasks[" + std::to_string(i) + "]");
    if (!c.has(t)) c.tasks.push_back(t);
  }
  check_task_dependencies(c, path);

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    const std::string sp = path + "solver.";
    if (!s.is_object()) config_fail(path + "solver", "expected an object");
    for (const auto& item : s.items()) {
      const std::string& key = item.key();
      if (key == "newton_max_iter")
        c.solver.newton_max_iter = parse_int(item.value(), sp + key);
      else if (key == "newton_tol")
        c.solver.newton_tol = parse_positive(item.value(), sp + key);
      else if (key == "dedup_tol")
        c.solver.dedup_tol = parse_positive(item.value(), sp + key);
      else if (key == "max_starts")
        c.solver.max_starts = parse_int(item.value(), sp + key);
      else if (key == "expected_count")
        c.solver.expected_count = parse_int(item.value(), sp + key);
      else
        config_fail(sp + key, "unknown solver key");
    }
    try {
      c.solver.validate();
    } catch (const InvalidInput& e) {
      config_fail(path + "solver", e.what());
    }
  }
  if (j.contains("identity_shifts")) c.identity_shifts = parse_int_array(j.at("identity_shifts"), path + "identity_shifts");
  if (j.contains("sumrule_ms")) c.sumrule_ms = parse_int_array(j.at("sumrule_ms"), path + "sumrule_ms");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer()) config_fail(path + "seed", "expected an integer");
    c.solver.rng_seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
  }

  try {
    (void)c.model();
  } catch (const InvalidInput& e) {
    config_fail(path.empty() ? "<root>" : path.substr(0, path.size() - 1), e.what());
  }
  return c;
}

inline json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

}  // namespace detail

/// Accepts a single instance object or {"instances": [ ... ]}.
inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig rc;
  if (j.is_object() && j.contains("instances")) {
    const auto& arr = j.at("instances");
    if (!arr.is_array() || arr.empty()) detail::config_fail("instances", "expected a nonempty array");
    for (const auto& item : j.items())
      if (item.key() != "instances") detail::config_fail(item.key(), "unknown key next to \"instances\"");
    for (std::size_t i = 0; i < arr.size(); ++i)
      rc.instances.push_back(detail::parse_instance(arr[i], "instances[" + std::to_string(i) + "]."));
  } else {
    rc.instances.push_back(detail::parse_instance(j, ""));
  }
  return rc;
}

inline RunConfig parse_config_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

inline nlohmann::json to_json(const InstanceConfig& c) {
  using nlohmann::json;
  json j;
  j["family"] = to_string(c.family);
  j["two_ell"] = c.two_ell;
  j["z"] = json::array();
  for (Complex z : c.z) j["z"].push_back(detail::complex_json(z));
  j["mu"] = detail::complex_json(c.mu);
  if (c.family == Family::xxz) j["gamma"] = detail::complex_json(c.gamma);
  j["k"] = c.k;
  j["tasks"] = json::array();
  for (Task t : c.tasks) j["tasks"].push_back(to_string(t));
  json s;
  s["newton_max_iter"] = c.solver.newton_max_iter;
  s["newton_tol"] = c.solver.newton_tol;
  s["dedup_tol"] = c.solver.dedup_tol;
  if (c.solver.max_starts) s["max_starts"] = *c.solver.max_starts;
  if (c.solver.expected_count) s["expected_count"] = *c.solver.expected_count;
  j["solver"] = s;
  j["identity_shifts"] = c.identity_shifts;
  j["sumrule_ms"] = c.sumrule_ms;
  j["seed"] = c.solver.rng_seed;
  return j;
}

inline nlohmann::json to_json(const RunConfig& rc) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : rc.instances) arr.push_back(to_json(c));
  return {{"instances", arr}};
}

/// Homogeneous spin-1/2 periodic six-vertex chain of even length N, one
/// instance per sector k = 0..N/2, each with the sum rule m = S_z that the
/// periodic twist makes applicable.
inline RunConfig preset_fm(int n, double gamma = 0.6180339887498949) {
  if (n < 2 || n % 2 != 0) throw InvalidInput("the six-vertex preset needs an even chain length N >= 2");
  RunConfig rc;
  for (int k = 0; k <= n / 2; ++k) {
    InstanceConfig c;
    c.family = Family::xxz;
    c.two_ell.assign(static_cast<std::size_t>(n), 1);
    c.z.assign(static_cast<std::size_t>(n), Complex{1.0});
    c.mu = 0.0;
    c.gamma = gamma;
    c.k = k;
    c.tasks = {Task::solve, Task::classify, Task::identities, Task::sumrules, Task::count};
    c.sumrule_ms = {n / 2 - k};
    if (k >= 3) c.solver.expected_count = static_cast<int>(weight_subspace_dim(SpinList(c.two_ell), k));
    rc.instances.push_back(std::move(c));
  }
  return rc;
}

namespace detail {

struct InstanceResult {
  json report;
  bool pass = true;
};

inline InstanceResult run_instance(const InstanceConfig& cfg, std::size_t index, const RunOptions& opt) {
  InstanceConfig c = cfg;
  if (opt.tasks) c.tasks = *opt.tasks;
  const ModelSpec spec = c.model();
  const Sector sector = c.sector();
  const double class_tol = c.solver.dedup_tol;

  InstanceResult out;
  json& r = out.report;
  json failures = json::array();
  r["index"] = index;
  r["config"] = to_json(c);
  r["sector"] = {{"k", sector.k()}, {"two_sz", sector.two_sz()}};

  SolveOutcome outcome;
  std::vector<Classification> classes;
  if (c.has(Task::solve)) {
    outcome = solve(spec, sector, c.solver);
    r["solve"] = {{"solution_count", outcome.solutions.size()},
                  {"starts_used", outcome.starts_used},
                  {"under_found", outcome.under_found},
                  {"residual_max", outcome.residual_max},
                  {"degenerate", outcome.degenerate}};
    if (!outcome.note.empty()) r["solve"]["note"] = outcome.note;
    if (c.solver.expected_count && outcome.under_found)
      failures.push_back("solve: fewer admissible offdiagonal solutions than expected_count");

    json sols = json::array();
    for (std::size_t s = 0; s < outcome.solutions.size(); ++s) {
      const RootSet& roots = outcome.solutions[s];
      json sj;
      sj["index"] = s;
      sj["roots"] = json::array();
      for (Complex t : roots) sj["roots"].push_back(complex_json(t));
      sj["residual"] = normalized_residual(spec, sector, roots);

      const Classification cls = classify(spec, sector, roots, class_tol);
      classes.push_back(cls);
      const bool good = cls.admissible && cls.offdiagonal;
      if (c.has(Task::classify)) {
        auto points = [](const std::set<PointHit>& hits) {
          json a = json::array();
          for (const auto& [root, site] : hits) a.push_back(json::array({root, site}));
          return a;
        };
        const LemmaVerdict v = lemma_verdict(cls);
        sj["classification"] = {{"admissible", cls.admissible},
                                {"offdiagonal", cls.offdiagonal},
                                {"precondition_ok", cls.precondition_ok},
                                {"near_plus_points", points(cls.near_plus_points)},
                                {"near_minus_points", points(cls.near_minus_points)}};
        sj["lemma"] = {{"a", v.a}, {"b", v.b}, {"c", v.c}};
        if (v.zero_root_only)
          sj["lemma"]["finding"] = "implication fails only through a root at 0";
        else if (!v.all())
          failures.push_back("solution " + std::to_string(s) + ": admissibility implication violated");
      }

      if (c.has(Task::identities)) {
        if (!good) {
          sj["identities"] = {{"skipped", "inadmissible or diagonal solution"}};
        } else {
          json ids = json::array();
          for (int n : c.identity_shifts) {
            const IdentityQuery query = shift_query(spec, n);
            const IdentityValue v =
                spec.is_xxx() ? eval_F(spec, sector, query, roots) : eval_G(spec, sector, query, roots);
            const bool ok = v.normalized <= opt.thresholds.identity;
            json ij{{"n", n},
                    {"alpha", complex_json(query.alpha)},
                    {"value", complex_json(v.value)},
                    {"scale", v.scale},
                    {"normalized", v.normalized},
                    {"pass", ok}};
            if (v.branch_angle) ij["branch_angle"] = *v.branch_angle;
            ids.push_back(ij);
            if (!ok)
              failures.push_back("solution " + std::to_string(s) + ": identity at n = " + std::to_string(n) +
                                 " exceeds tolerance");
          }
          sj["identities"] = ids;
        }
      }

      if (c.has(Task::sumrules)) {
        json rules = json::array();
        if (!good) {
          sj["sumrules"] = {{"skipped", "inadmissible or diagonal solution"}};
        } else if (spec.is_xxx()) {
          if (spec.is_periodic()) {
            const Complex d = xxx_periodic_relation(spec, sector, roots);
            double scale = 1.0;
            for (Complex t : roots) scale = std::max(scale, std::abs(t));
            const bool ok = std::abs(d) <= opt.thresholds.sumrule * scale;
            rules.push_back({{"rule", sector.two_sz() == 0 ? "sum_t_equals_sum_ell_z" : "residue_at_infinity"},
                             {"applicable", true},
                             {"defect", complex_json(d)},
                             {"pass", ok}});
            if (!ok) failures.push_back("solution " + std::to_string(s) + ": periodic relation defect too large");
          } else {
            rules.push_back({{"rule", "periodic_relation"}, {"applicable", false}});
          }
          sj["sumrules"] = rules;
        } else {
          for (int m : c.sumrule_ms) {
            json rj{{"m", m}};
            try {
              const Complex d = sum_rule_tz(spec, sector, m, roots);
              const auto parts = tz_boundary_residues(spec, sector, m, roots);
              const double scale = std::max({1.0, std::abs(parts.at_zero), std::abs(parts.at_infinity)});
              const bool ok = std::abs(d) <= opt.thresholds.sumrule * scale;
              rj["applicable"] = true;
              rj["defect"] = complex_json(d);
              rj["pass"] = ok;
              if (!ok)
                failures.push_back("solution " + std::to_string(s) + ": sum rule m = " + std::to_string(m) +
                                   " defect too large");
            } catch (const ApplicabilityError&) {
              rj["applicable"] = false;
            }
            rules.push_back(rj);
          }
          sj["sumrules"] = rules;
        }
      }
      sols.push_back(sj);
    }
    r["solutions"] = sols;
  }

  if (c.has(Task::count)) {
    json cj;
    if (c.has(Task::solve)) {
      const CountReport cr = completeness_report(spec, sector, outcome, classes);
      cj = {{"expected", cr.expected},
            {"found_admissible_offdiagonal", cr.found_admissible_offdiagonal},
            {"found_total", cr.found_total},
            {"match", cr.match},
            {"basis", cr.basis},
            {"conjectural", cr.conjectural},
            {"root_of_unity", cr.root_of_unity},
            {"generic_twist", cr.generic_twist}};
      const bool generic = lemma_precondition(spec, class_tol) && !outcome.degenerate && cr.generic_twist;
      if (!cr.match) {
        if (!cr.conjectural && generic)
          failures.push_back("count: found " + std::to_string(cr.found_admissible_offdiagonal) + " admissible offdiagonal solutions, expected " +
                             std::to_string(cr.expected));
        else
          cj["finding"] = "count differs from the conjectured or non-generic expectation";
      }
    } else {
      const bool periodic_xxx = spec.is_xxx() && spec.is_periodic();
      cj = {{"expected", periodic_xxx ? singular_vector_count(spec.spins(), sector.k())
                                      : weight_subspace_dim(spec.spins(), sector.k())},
            {"basis", periodic_xxx ? "singular_vector_count" : "weight_subspace_dim"},
            {"weight_subspace_dim", weight_subspace_dim(spec.spins(), sector.k())},
            {"singular_vector_count", singular_vector_count(spec.spins(), sector.k())}};
    }
    r["count"] = cj;
  }

  out.pass = failures.empty();
  r["failures"] = failures;
  r["pass"] = out.pass;
  return out;
}

}  // namespace detail

/// Thread cap from BETHEKIT_THREADS (default 1).
inline int threads_from_environment() {
  const char* v = std::getenv("BETHEKIT_THREADS");
  if (v == nullptr) return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    return 1;
  }
}

/// Runs every instance (in parallel up to opt.threads) and assembles the
/// report in instance order. Reports do not depend on the thread count.
inline RunResult run(const RunConfig& config, const RunOptions& opt = {}) {
  using nlohmann::json;
  std::vector<detail::InstanceResult> results(config.instances.size());
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, opt.threads)), config.instances.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < config.instances.size(); ++i)
      results[i] = detail::run_instance(config.instances[i], i, opt);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < config.instances.size(); i = next++)
            results[i] = detail::run_instance(config.instances[i], i, opt);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  RunResult rr;
  json& report = rr.report;
  report["header"] = {{"tool", kToolName},
                      {"version", kToolVersion},
                      {"command", opt.command},
                      {"tolerances",
                       {{"identity", opt.thresholds.identity},
                        {"sumrule", opt.thresholds.sumrule},
                        {"classification", "solver.dedup_tol"},
                        {"twist", kDefaultTol}}},
                      {"config", to_json(config)}};
  json instances = json::array();
  json failures = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const auto& f : results[i].report["failures"]) failures.push_back("instance " + std::to_string(i) + ": " + f.get<std::string>());
    rr.pass = rr.pass && results[i].pass;
    instances.push_back(std::move(results[i].report));
  }
  report["instances"] = instances;
  report["summary"] = {{"pass", rr.pass}, {"instances", results.size()}, {"failures", failures}};
  return rr;
}

}  // namespace bethekit
