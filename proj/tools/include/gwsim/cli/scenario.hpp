#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gwsim/bisexual.hpp"
#include "gwsim/brs.hpp"
#include "gwsim/control.hpp"
#include "gwsim/engine.hpp"
#include "gwsim/law.hpp"
#include "gwsim/series.hpp"

namespace gwsim::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Experiment { Gw, Controlled, Phi, Bisexual, BclSeries, Brs };
const char* to_string(Experiment e) noexcept;

enum class OutputFormat { Csv, Json };

struct OutputSpec {
  OutputFormat format = OutputFormat::Csv;
  /// Empty means stdout.
  std::string path;
};

struct BisexualSettings {
  double alpha = 0.5;
  MatingFunction mating = MatingFunction::Min{};
  std::uint64_t initial_units = 1;
  std::uint64_t k_max = 64;
  std::size_t trials_per_k = 10000;
};

struct SeriesSettings {
  /// nullopt: pick the family by schedule_search.
  std::optional<ScheduleFamily> family = ScheduleFamily::Linear;
  std::size_t max_points = 50;
};

struct BrsSettings {
  Population population;
  std::vector<double> budgets;
  std::vector<ClaimSampling> modes{ClaimSampling::Independent, ClaimSampling::Comonotone};
  double tol = 1e-12;
};

/// A validated scenario document.
struct ScenarioConfig {
  int version = kSchemaVersion;
  Experiment experiment = Experiment::Gw;
  std::optional<OffspringLaw> law;
  std::optional<ControlPolicy> policy;
  std::size_t horizon = 1;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::uint64_t initial_size = 1;
  std::uint64_t escape_size = 0;
  std::uint64_t population_cap = kDefaultPopulationCap;
  SamplingMode sampling = SamplingMode::Fast;
  std::size_t failure_budget = 0;
  unsigned threads = 1;
  /// Series length for the analytic criteria in `compare`.
  std::size_t n_max = 10000;
  std::optional<BisexualSettings> bisexual;
  SeriesSettings series;
  std::optional<BrsSettings> brs;
  OutputSpec output;
  /// FNV-1a of the canonical document without run-only keys (threads).
  std::string config_hash;

  BatchSpec batch_spec() const;
};

/// Parses and validates a scenario document. Throws ConfigError.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace gwsim::cli
