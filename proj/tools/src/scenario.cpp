#include "gwsim/cli/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "gwsim/errors.hpp"
#include "json.hpp"

namespace gwsim::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
}

const json& require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::uint64_t count(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) fail(where, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(where, "expected a nonnegative integer");
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

/// Converts library DomainErrors raised while building objects.
template <class F>
auto build(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

OffspringLaw parse_law(const json& j, const std::string& where) {
  const std::string kind = text(require(j, where, "kind"), where + ".kind");
  if (kind == "explicit") {
    allow_keys(j, where, {"kind", "pmf"});
    const json& pmf = require(j, where, "pmf");
    if (!pmf.is_array()) fail(where + ".pmf", "expected an array of [k, p_k] pairs");
    std::vector<std::pair<std::uint64_t, double>> pairs;
    for (const auto& entry : pmf) {
      if (!entry.is_array() || entry.size() != 2) fail(where + ".pmf", "expected [k, p_k] pairs");
      pairs.emplace_back(count(entry[0], where + ".pmf"), number(entry[1], where + ".pmf"));
    }
    return build(where, [&] { return OffspringLaw::explicit_pmf(pairs); });
  }
  if (kind == "poisson") {
    allow_keys(j, where, {"kind", "lambda"});
    const double lambda = number(require(j, where, "lambda"), where + ".lambda");
    return build(where, [&] { return OffspringLaw::poisson(lambda); });
  }
  if (kind == "geometric") {
    allow_keys(j, where, {"kind", "r"});
    const double r = number(require(j, where, "r"), where + ".r");
    return build(where, [&] { return OffspringLaw::geometric(r); });
  }
  if (kind == "binomial") {
    allow_keys(j, where, {"kind", "n", "p"});
    const auto n = count(require(j, where, "n"), where + ".n");
    const double p = number(require(j, where, "p"), where + ".p");
    if (n > 1'000'000) fail(where + ".n", "too large");
    return build(where, [&] { return OffspringLaw::binomial(static_cast<std::uint32_t>(n), p); });
  }
  fail(where + ".kind", "unknown law '" + kind + "'");
}

IntegerFunction parse_function(const json& j, const std::string& where) {
  const std::string kind = text(require(j, where, "kind"), where + ".kind");
  if (kind == "constant") {
    allow_keys(j, where, {"kind", "c"});
    return IntegerFunction::constant(count(require(j, where, "c"), where + ".c"));
  }
  if (kind == "identity") {
    allow_keys(j, where, {"kind"});
    return IntegerFunction::identity();
  }
  if (kind == "log") {
    allow_keys(j, where, {"kind", "a", "base", "rounding", "c", "min"});
    Rounding rounding = Rounding::Floor;
    if (j.contains("rounding")) {
      const std::string r = text(j.at("rounding"), where + ".rounding");
      if (r == "ceil") rounding = Rounding::Ceil;
      else if (r != "floor") fail(where + ".rounding", "expected 'floor' or 'ceil'");
    }
    const double a = number(require(j, where, "a"), where + ".a");
    const double base = number(require(j, where, "base"), where + ".base");
    const double c = j.contains("c") ? number(j.at("c"), where + ".c") : 0.0;
    const std::uint64_t min = j.contains("min") ? count(j.at("min"), where + ".min") : 0;
    return build(where, [&] { return IntegerFunction::logarithmic(a, base, rounding, c, min); });
  }
  if (kind == "linear") {
    allow_keys(j, where, {"kind", "a", "c"});
    const double a = number(require(j, where, "a"), where + ".a");
    const double c = j.contains("c") ? number(j.at("c"), where + ".c") : 0.0;
    return build(where, [&] { return IntegerFunction::linear(a, c); });
  }
  if (kind == "table") {
    allow_keys(j, where, {"kind", "values"});
    const json& values = require(j, where, "values");
    if (!values.is_array()) fail(where + ".values", "expected an array");
    std::vector<std::uint64_t> v;
    for (const auto& x : values) v.push_back(count(x, where + ".values"));
    return build(where, [&] { return IntegerFunction::table(std::move(v)); });
  }
  fail(where + ".kind", "unknown function form '" + kind + "'");
}

DisasterSchedule parse_schedule(const json& j, const std::string& where) {
  const std::string kind = text(require(j, where, "kind"), where + ".kind");
  if (kind == "table") {
    allow_keys(j, where, {"kind", "values"});
    const json& values = require(j, where, "values");
    if (!values.is_array()) fail(where + ".values", "expected an array");
    std::vector<double> v;
    for (const auto& x : values) v.push_back(number(x, where + ".values"));
    return build(where, [&] { return DisasterSchedule(DisasterSchedule::Table{std::move(v)}); });
  }
  if (kind == "harmonic") {
    allow_keys(j, where, {"kind", "c", "start"});
    const double c = number(require(j, where, "c"), where + ".c");
    const std::uint64_t start = j.contains("start") ? count(j.at("start"), where + ".start") : 1;
    return build(where, [&] { return DisasterSchedule(DisasterSchedule::Harmonic{c, start}); });
  }
  if (kind == "constant") {
    allow_keys(j, where, {"kind", "c"});
    const double c = number(require(j, where, "c"), where + ".c");
    return build(where, [&] { return DisasterSchedule(DisasterSchedule::Constant{c}); });
  }
  fail(where + ".kind", "unknown schedule form '" + kind + "'");
}

ControlPolicy parse_policy(const json& j, const std::string& where) {
  const std::string kind = text(require(j, where, "kind"), where + ".kind");
  if (kind == "truncation") {
    allow_keys(j, where, {"kind", "g"});
    return policies::Truncation{parse_function(require(j, where, "g"), where + ".g")};
  }
  if (kind == "phi") {
    allow_keys(j, where, {"kind", "phi"});
    return policies::Phi{parse_function(require(j, where, "phi"), where + ".phi")};
  }
  if (kind == "absorbing") {
    allow_keys(j, where, {"kind", "rule"});
    const json& rule = require(j, where, "rule");
    const std::string rw = where + ".rule";
    const std::string rkind = text(require(rule, rw, "kind"), rw + ".kind");
    if (rkind == "truncation") {
      allow_keys(rule, rw, {"kind", "g"});
      return policies::Absorbing{rules::TruncationAsAbsorption{parse_function(require(rule, rw, "g"), rw + ".g")}};
    }
    if (rkind == "disaster") {
      allow_keys(rule, rw, {"kind", "delta"});
      return policies::Absorbing{rules::Disaster{parse_schedule(require(rule, rw, "delta"), rw + ".delta")}};
    }
    if (rkind == "lower_boundary") {
      allow_keys(rule, rw, {"kind", "b"});
      return policies::Absorbing{rules::LowerBoundary{parse_function(require(rule, rw, "b"), rw + ".b")}};
    }
    fail(rw + ".kind", "unknown absorbing rule '" + rkind + "'");
  }
  fail(where + ".kind", "unknown policy '" + kind + "'");
}

MatingFunction parse_mating(const json& j, const std::string& where) {
  const std::string kind = text(require(j, where, "kind"), where + ".kind");
  if (kind == "min") {
    allow_keys(j, where, {"kind"});
    return MatingFunction::Min{};
  }
  if (kind == "daley_monogamy") {
    allow_keys(j, where, {"kind"});
    return MatingFunction::DaleyMonogamy{};
  }
  if (kind == "daley_polygamy") {
    allow_keys(j, where, {"kind", "d"});
    const auto d = count(require(j, where, "d"), where + ".d");
    return build(where, [&] { return MatingFunction(MatingFunction::DaleyPolygamy{d}); });
  }
  fail(where + ".kind", "unknown mating function '" + kind + "'");
}

ClaimDistribution parse_distribution(const json& j, const std::string& where) {
  const std::string kind = text(require(j, where, "kind"), where + ".kind");
  if (kind == "uniform") {
    allow_keys(j, where, {"kind", "b"});
    const double b = j.contains("b") ? number(j.at("b"), where + ".b") : 1.0;
    return build(where, [&] { return ClaimDistribution::uniform(b); });
  }
  if (kind == "exponential") {
    allow_keys(j, where, {"kind", "rate"});
    const double rate = j.contains("rate") ? number(j.at("rate"), where + ".rate") : 1.0;
    return build(where, [&] { return ClaimDistribution::exponential(rate); });
  }
  fail(where + ".kind", "unknown claim distribution '" + kind + "'");
}

BrsSettings parse_brs(const json& j, const std::string& where) {
  allow_keys(j, where, {"budget", "groups", "modes", "tol"});
  BrsSettings out{Population{{}, 1.0}, {}, {ClaimSampling::Independent, ClaimSampling::Comonotone}, 1e-12};
  const json& budget = require(j, where, "budget");
  if (budget.is_array()) {
    for (const auto& b : budget) out.budgets.push_back(number(b, where + ".budget"));
  } else {
    out.budgets.push_back(number(budget, where + ".budget"));
  }
  if (out.budgets.empty()) fail(where + ".budget", "no budget given");
  for (double b : out.budgets)
    if (!(b > 0.0)) fail(where + ".budget", "budgets must be > 0");
  const json& groups = require(j, where, "groups");
  if (!groups.is_array() || groups.empty()) fail(where + ".groups", "expected a nonempty array");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string gw = where + ".groups[" + std::to_string(i) + "]";
    allow_keys(groups[i], gw, {"count", "distribution"});
    const auto c = count(require(groups[i], gw, "count"), gw + ".count");
    if (c < 1) fail(gw + ".count", "must be positive");
    out.population.groups.push_back({c, parse_distribution(require(groups[i], gw, "distribution"), gw + ".distribution")});
  }
  if (j.contains("modes")) {
    out.modes.clear();
    for (const auto& m : j.at("modes")) {
      const std::string s = text(m, where + ".modes");
      if (s == "independent") out.modes.push_back(ClaimSampling::Independent);
      else if (s == "comonotone") out.modes.push_back(ClaimSampling::Comonotone);
      else fail(where + ".modes", "unknown sampling mode '" + s + "'");
    }
    if (out.modes.empty()) fail(where + ".modes", "no sampling mode given");
  }
  if (j.contains("tol")) {
    out.tol = number(j.at("tol"), where + ".tol");
    if (!(out.tol > 0.0)) fail(where + ".tol", "must be > 0");
  }
  out.population.budget = out.budgets.front();
  return out;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Experiment parse_experiment(const std::string& s) {
  if (s == "gw") return Experiment::Gw;
  if (s == "controlled") return Experiment::Controlled;
  if (s == "phi") return Experiment::Phi;
  if (s == "bisexual") return Experiment::Bisexual;
  if (s == "bcl_series") return Experiment::BclSeries;
  if (s == "brs") return Experiment::Brs;
  fail("experiment", "unknown experiment '" + s + "'");
}

}  // namespace

const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::Gw:
      return "gw";
    case Experiment::Controlled:
      return "controlled";
    case Experiment::Phi:
      return "phi";
    case Experiment::Bisexual:
      return "bisexual";
    case Experiment::BclSeries:
      return "bcl_series";
    case Experiment::Brs:
      return "brs";
  }
  return "?";
}

BatchSpec ScenarioConfig::batch_spec() const {
  if (!law) throw ConfigError("scenario has no law");
  BatchSpec spec{.law = *law};
  spec.policy = policy;
  spec.horizon = horizon;
  spec.trials = trials;
  spec.initial_size = initial_size;
  spec.master_seed = master_seed;
  spec.escape_size = escape_size;
  spec.sampler = {population_cap, sampling};
  spec.failure_budget = failure_budget;
  spec.threads = threads;
  return spec;
}

ScenarioConfig parse_scenario(std::string_view text_in) {
  json doc;
  try {
    doc = json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(doc, "config",
             {"version", "experiment", "law", "policy", "horizon", "trials", "master_seed",
              "initial_size", "escape_size", "population_cap", "sampling", "failure_budget",
              "threads", "n_max", "bisexual", "series", "population", "output"});

  ScenarioConfig cfg;
  const auto version = count(require(doc, "config", "version"), "version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion))
    fail("version", "unsupported schema version " + std::to_string(version));
  cfg.experiment = parse_experiment(text(require(doc, "config", "experiment"), "experiment"));

  auto opt_count = [&](const char* key, auto& field) {
    if (doc.contains(key)) field = static_cast<std::decay_t<decltype(field)>>(count(doc.at(key), key));
  };
  opt_count("horizon", cfg.horizon);
  opt_count("trials", cfg.trials);
  opt_count("master_seed", cfg.master_seed);
  opt_count("initial_size", cfg.initial_size);
  opt_count("escape_size", cfg.escape_size);
  opt_count("population_cap", cfg.population_cap);
  opt_count("failure_budget", cfg.failure_budget);
  opt_count("threads", cfg.threads);
  opt_count("n_max", cfg.n_max);
  if (!doc.contains("trials") && cfg.experiment != Experiment::Brs) fail("config", "missing 'trials'");
  if (cfg.trials < 1) fail("trials", "must be >= 1");
  if (cfg.experiment != Experiment::Brs) {
    if (!doc.contains("horizon")) fail("config", "missing 'horizon'");
    if (cfg.horizon < 1) fail("horizon", "must be >= 1");
  }
  if (cfg.n_max < 100) fail("n_max", "must be >= 100");
  if (cfg.threads < 1) cfg.threads = 1;
  if (doc.contains("sampling")) {
    const std::string s = text(doc.at("sampling"), "sampling");
    if (s == "fast") cfg.sampling = SamplingMode::Fast;
    else if (s == "monotone") cfg.sampling = SamplingMode::Monotone;
    else fail("sampling", "expected 'fast' or 'monotone'");
  }

  if (doc.contains("law")) cfg.law = parse_law(doc.at("law"), "law");
  if (doc.contains("policy")) cfg.policy = parse_policy(doc.at("policy"), "policy");

  const bool needs_law = cfg.experiment != Experiment::Brs;
  if (needs_law && !cfg.law) fail("config", "missing 'law'");
  switch (cfg.experiment) {
    case Experiment::Gw:
      if (cfg.policy) fail("policy", "gw experiments take no policy; use 'controlled' or 'phi'");
      break;
    case Experiment::Controlled:
      if (!cfg.policy || std::holds_alternative<policies::Phi>(*cfg.policy))
        fail("policy", "controlled experiments need a truncation or absorbing policy");
      break;
    case Experiment::Phi:
      if (!cfg.policy || !std::holds_alternative<policies::Phi>(*cfg.policy))
        fail("policy", "phi experiments need a phi policy");
      break;
    case Experiment::Bisexual:
    case Experiment::BclSeries:
    case Experiment::Brs:
      break;
  }

  if (cfg.experiment == Experiment::Bisexual) {
    const json& b = require(doc, "config", "bisexual");
    allow_keys(b, "bisexual", {"alpha", "mating", "initial_units", "k_max", "trials_per_k"});
    BisexualSettings s;
    if (b.contains("alpha")) s.alpha = number(b.at("alpha"), "bisexual.alpha");
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("bisexual.alpha", "must lie in (0, 1)");
    if (b.contains("mating")) s.mating = parse_mating(b.at("mating"), "bisexual.mating");
    if (b.contains("initial_units")) s.initial_units = count(b.at("initial_units"), "bisexual.initial_units");
    if (s.initial_units < 1) fail("bisexual.initial_units", "must be >= 1");
    if (b.contains("k_max")) s.k_max = count(b.at("k_max"), "bisexual.k_max");
    if (s.k_max < 2) fail("bisexual.k_max", "must be >= 2");
    if (b.contains("trials_per_k")) s.trials_per_k = count(b.at("trials_per_k"), "bisexual.trials_per_k");
    if (s.trials_per_k < 1) fail("bisexual.trials_per_k", "must be >= 1");
    if (cfg.policy) fail("policy", "bisexual experiments take no policy");
    cfg.bisexual = s;
  }

  if (doc.contains("series")) {
    const json& s = doc.at("series");
    allow_keys(s, "series", {"schedule", "max_points"});
    if (s.contains("schedule")) {
      const std::string f = text(s.at("schedule"), "series.schedule");
      if (f == "k") cfg.series.family = ScheduleFamily::Linear;
      else if (f == "2^k") cfg.series.family = ScheduleFamily::PowersOfTwo;
      else if (f == "k^2") cfg.series.family = ScheduleFamily::Squares;
      else if (f == "search") cfg.series.family.reset();
      else fail("series.schedule", "expected 'k', '2^k', 'k^2' or 'search'");
    }
    if (s.contains("max_points")) cfg.series.max_points = count(s.at("max_points"), "series.max_points");
    if (cfg.series.max_points < 2) fail("series.max_points", "must be >= 2");
  }

  if (cfg.experiment == Experiment::Brs) cfg.brs = parse_brs(require(doc, "config", "population"), "population");

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    allow_keys(o, "output", {"format", "path"});
    if (o.contains("format")) {
      const std::string f = text(o.at("format"), "output.format");
      if (f == "csv") cfg.output.format = OutputFormat::Csv;
      else if (f == "json") cfg.output.format = OutputFormat::Json;
      else fail("output.format", "expected 'csv' or 'json'");
    }
    if (o.contains("path")) cfg.output.path = text(o.at("path"), "output.path");
  }

  if (cfg.law && cfg.experiment != Experiment::Bisexual) {
    try {
      validate(cfg.batch_spec());
    } catch (const ConfigError& e) {
      fail("config", e.what());
    }
  }

  json canonical = doc;
  canonical.erase("threads");
  cfg.config_hash = fnv1a_hex(canonical.dump());
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace gwsim::cli
