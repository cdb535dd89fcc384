#include "gwsim/cli/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <variant>

#include "gwsim/errors.hpp"
#include "json.hpp"

namespace gwsim::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kZ99 = 2.5758293035489004;

/// Empty cells are left blank in CSV and omitted from JSON records.
struct Absent {};
using Cell = std::variant<Absent, std::string, double, std::uint64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  ordered_json summary = ordered_json::object();
};

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string csv_cell(const Cell& c) {
  struct {
    std::string operator()(Absent) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::uint64_t u) const { return std::to_string(u); }
    std::string operator()(bool b) const { return b ? "1" : "0"; }
  } visitor;
  return std::visit(visitor, c);
}

ordered_json json_cell(const Cell& c) {
  struct {
    ordered_json operator()(Absent) const { return nullptr; }
    ordered_json operator()(const std::string& s) const { return s; }
    ordered_json operator()(double d) const { return std::isfinite(d) ? ordered_json(d) : ordered_json(nullptr); }
    ordered_json operator()(std::uint64_t u) const { return u; }
    ordered_json operator()(bool b) const { return b; }
  } visitor;
  return std::visit(visitor, c);
}

std::string render(const ScenarioConfig& cfg, const Table& table, const char* report) {
  if (cfg.output.format == OutputFormat::Csv) {
    std::ostringstream out;
    out << "# gwsim report=" << report << " experiment=" << to_string(cfg.experiment)
        << " config_hash=" << cfg.config_hash << " master_seed=" << cfg.master_seed
        << " version=" << kArtifactVersion << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
      out << '\n';
    }
    return out.str();
  }
  ordered_json doc;
  doc["provenance"] = {{"config_hash", cfg.config_hash},
                       {"master_seed", cfg.master_seed},
                       {"version", kArtifactVersion}};
  doc["report"] = report;
  doc["experiment"] = to_string(cfg.experiment);
  doc["summary"] = table.summary;
  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json rec = ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      if (!std::holds_alternative<Absent>(row[i])) rec[table.columns[i]] = json_cell(row[i]);
    rows.push_back(std::move(rec));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

Cell maybe(double x) { return std::isnan(x) ? Cell{Absent{}} : Cell{x}; }

/// Wilson score interval at 99%.
std::pair<double, double> wilson(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double z2 = kZ99 * kZ99;
  const double nn = static_cast<double>(n);
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = kZ99 * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

void batch_summary(Table& t, const BatchResult& r) {
  t.summary["trials"] = r.trials;
  t.summary["horizon"] = r.horizon;
  t.summary["extinct_by_horizon"] = r.extinct_by_horizon;
  t.summary["extinction_fraction"] = r.extinction_fraction;
  t.summary["mean_final_size_given_survival"] = json_cell(r.mean_final_size_given_survival);
  t.summary["escaped"] = r.escaped;
  t.summary["zero_absorbing"] = r.zero_absorbing;
  t.summary["failed_trials"] = r.failures.size();
  t.summary["caveat"] = r.caveat;
}

Table generation_table(const BatchResult& r, const char* size_column) {
  Table t;
  t.columns = {"generation", "extinct_fraction", size_column};
  for (std::size_t n = 0; n <= r.horizon; ++n) {
    t.rows.push_back({std::uint64_t{n},
                      static_cast<double>(r.per_generation_extinct_counts[n]) / static_cast<double>(r.trials),
                      maybe(r.mean_given_alive(n))});
  }
  batch_summary(t, r);
  return t;
}

BisexualBatchSpec bisexual_spec(const ScenarioConfig& cfg) {
  const auto& b = *cfg.bisexual;
  BisexualBatchSpec spec{.law = *cfg.law};
  spec.alpha = b.alpha;
  spec.mating = b.mating;
  spec.initial_units = b.initial_units;
  spec.horizon = cfg.horizon;
  spec.trials = cfg.trials;
  spec.master_seed = cfg.master_seed;
  spec.sampler = {cfg.population_cap, cfg.sampling};
  spec.failure_budget = cfg.failure_budget;
  spec.threads = cfg.threads;
  return spec;
}

Table series_table(const ScenarioConfig& cfg) {
  const BatchSpec spec = cfg.batch_spec();
  const ControlPolicy* policy = spec.policy ? &*spec.policy : nullptr;
  if (!zero_is_absorbing(policy))
    throw ConfigError("bcl_series needs an absorbing zero state (phi(0) > 0 given)");
  const BatchResult batch = run_batch(spec);

  std::vector<std::size_t> schedule;
  std::string family;
  if (cfg.series.family) {
    schedule = make_schedule(*cfg.series.family, cfg.series.max_points, cfg.horizon);
    family = to_string(*cfg.series.family);
  } else {
    auto choice = schedule_search(batch.extinction_generation, cfg.horizon, cfg.series.max_points);
    schedule = std::move(choice.schedule);
    family = to_string(choice.family);
  }
  if (schedule.empty()) throw ConfigError("horizon too short for the requested schedule");
  const auto est = estimate_conditional_series(batch.extinction_generation, cfg.horizon, schedule);

  Table t;
  t.columns = {"k", "t_k", "p_marginal", "p_conditional", "partial_sum"};
  for (std::size_t k = 0; k < est.schedule.size(); ++k) {
    t.rows.push_back({std::uint64_t{k + 1}, std::uint64_t{est.schedule[k]}, est.p_marginal[k],
                      est.p_conditional[k] ? Cell{*est.p_conditional[k]} : Cell{std::string("NA")},
                      est.partial_sums[k]});
  }
  batch_summary(t, batch);
  t.summary["schedule"] = family;
  t.summary["empty_conditioning"] = est.empty_conditioning();
  t.summary["chain_identity_holds"] = chain_identity_holds(est);
  return t;
}

Table brs_table(const ScenarioConfig& cfg) {
  const BrsSettings& s = *cfg.brs;
  Table t;
  t.columns = {"s", "t", "bound", "estimate", "halfwidth", "mode"};
  std::uint64_t index = 0;
  for (double budget : s.budgets) {
    Population pop = s.population;
    pop.budget = budget;
    const BrsBound bound = brs_bound(pop, s.tol);
    for (ClaimSampling mode : s.modes) {
      const auto est = estimate_expected_stop(pop, cfg.trials, mix64(cfg.master_seed ^ mix64(index++)), mode);
      t.rows.push_back({budget, bound.threshold ? Cell{*bound.threshold} : Cell{std::string("NA")},
                        bound.bound, est.mean, est.halfwidth, std::string(to_string(mode))});
    }
  }
  t.summary["population_size"] = s.population.size();
  t.summary["trials"] = cfg.trials;
  return t;
}

Table unit_reproduction_table(const ScenarioConfig& cfg) {
  const auto& b = *cfg.bisexual;
  const BatchResult batch = run_bisexual_batch(bisexual_spec(cfg));
  const auto report = unit_reproduction_check(*cfg.law, b.alpha, b.mating, b.k_max, b.trials_per_k, cfg.master_seed);
  const auto [lo, hi] = wilson(batch.extinct_by_horizon, batch.trials);
  Table t;
  t.columns = {"k", "m_hat", "halfwidth", "exact", "bounded", "tail", "evidence",
               "empirical_extinction_fraction", "ci_low", "ci_high"};
  for (const auto& p : report.points) {
    t.rows.push_back({p.k, p.estimate.mean, p.estimate.halfwidth, p.estimate.exact, report.bounded,
                      std::string(to_string(report.tail)), std::string(to_string(report.evidence)),
                      batch.extinction_fraction, lo, hi});
  }
  batch_summary(t, batch);
  t.summary["evidence"] = to_string(report.evidence);
  t.summary["note"] = "statistical evidence for certain extinction, never a proof or a survival verdict";
  return t;
}

}  // namespace

std::string run_experiment(const ScenarioConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Gw:
    case Experiment::Controlled:
    case Experiment::Phi: {
      const BatchResult r = run_batch(cfg.batch_spec());
      Table t = generation_table(r, "mean_size_given_survival");
      const auto q = extinction_probability(*cfg.law);
      t.summary["analytic_q_uncontrolled"] = q.q;
      return render(cfg, t, "run");
    }
    case Experiment::Bisexual:
      return render(cfg, generation_table(run_bisexual_batch(bisexual_spec(cfg)), "mean_units_given_survival"),
                    "run");
    case Experiment::BclSeries:
      return render(cfg, series_table(cfg), "run");
    case Experiment::Brs:
      return render(cfg, brs_table(cfg), "run");
  }
  throw ConfigError("unknown experiment");
}

std::string compare_experiment(const ScenarioConfig& cfg) {
  if (cfg.experiment == Experiment::Bisexual) return render(cfg, unit_reproduction_table(cfg), "compare");
  if (cfg.experiment == Experiment::BclSeries || cfg.experiment == Experiment::Brs)
    throw ConfigError("compare supports gw, controlled, phi and bisexual scenarios");

  const BatchResult batch = run_batch(cfg.batch_spec());
  const double q = extinction_probability(*cfg.law).q;
  const auto [lo, hi] = wilson(batch.extinct_by_horizon, batch.trials);

  Table t;
  t.columns = {"criterion", "verdict", "exact", "decay_exponent", "analytic_q",
               "empirical_extinction_fraction", "ci_low", "ci_high", "trials", "horizon",
               "envelope_conditional_violations", "envelope_unconditional_violations"};
  auto row = [&](std::string name, Cell verdict, Cell exact, Cell exponent, Cell cond, Cell uncond) {
    t.rows.push_back({std::move(name), std::move(verdict), std::move(exact), std::move(exponent), q,
                      batch.extinction_fraction, lo, hi, std::uint64_t{batch.trials},
                      std::uint64_t{batch.horizon}, std::move(cond), std::move(uncond)});
  };
  auto criterion_rows = [&](const IntegerFunction& g, bool with_expectation) {
    const auto env = envelope_check(batch, g);
    const Cell cond = std::uint64_t{env.conditional_violations.size()};
    const Cell uncond = std::uint64_t{env.unconditional_violations.size()};
    if (!(q > 0.0 && q < 1.0)) {
      // m <= 1 (q = 1) or p_0 = 0 (q = 0): the series criterion does not apply.
      row("zubkov", Absent{}, Absent{}, Absent{}, cond, uncond);
      return;
    }
    const auto v = zubkov_criterion(q, g, cfg.n_max);
    const Cell exponent = v.fitted_decay_exponent ? Cell{*v.fitted_decay_exponent} : Cell{Absent{}};
    row("zubkov", std::string(to_string(v.verdict)), v.exact, exponent, cond, uncond);
    if (with_expectation) {
      const auto e = expectation_criterion(q, q, g, cfg.n_max);
      const Cell eexp = e.fitted_decay_exponent ? Cell{*e.fitted_decay_exponent} : Cell{Absent{}};
      row("expectation", std::string(to_string(e.verdict)), e.exact, eexp, cond, uncond);
    }
  };

  if (!cfg.policy) {
    row("none", Absent{}, Absent{}, Absent{}, Absent{}, Absent{});
  } else if (const auto* tr = std::get_if<policies::Truncation>(&*cfg.policy)) {
    criterion_rows(tr->g, false);
  } else if (const auto* ab = std::get_if<policies::Absorbing>(&*cfg.policy)) {
    if (const auto* ta = std::get_if<rules::TruncationAsAbsorption>(&ab->rule)) {
      criterion_rows(ta->g, true);
    } else if (const auto* d = std::get_if<rules::Disaster>(&ab->rule)) {
      row("disaster_schedule",
          std::string(d->delta.sum_diverges() ? to_string(Verdict::Divergent) : to_string(Verdict::Convergent)),
          true, Absent{}, Absent{}, Absent{});
    } else {
      row("none", Absent{}, Absent{}, Absent{}, Absent{}, Absent{});
    }
  } else {
    row("none", Absent{}, Absent{}, Absent{}, Absent{}, Absent{});
  }
  batch_summary(t, batch);
  return render(cfg, t, "compare");
}

int exit_code_for(const std::string& kind) {
  if (kind == "ConfigError") return kExitConfigError;
  if (kind == "NumericFailure") return kExitNumericFailure;
  if (kind == "PopulationOverflow") return kExitPopulationOverflow;
  return kExitFailure;
}

}  // namespace gwsim::cli
