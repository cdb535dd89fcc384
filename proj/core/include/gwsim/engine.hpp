#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gwsim/control.hpp"
#include "gwsim/law.hpp"
#include "gwsim/random.hpp"

namespace gwsim {

inline constexpr std::uint64_t kDefaultPopulationCap = std::uint64_t{1} << 48;

/// Marks generations of an escaped trajectory whose exact size is unknown.
inline constexpr std::uint64_t kEscapedCount = std::numeric_limits<std::uint64_t>::max();

enum class SamplingMode {
  /// Closed-form aggregate draws above 64 parents.
  Fast,
  /// One uniform per parent, always. N(z) is then pointwise nondecreasing
  /// in z on a shared stream, which couples runs with different controls.
  Monotone,
};

struct SamplerOptions {
  std::uint64_t population_cap = kDefaultPopulationCap;
  SamplingMode mode = SamplingMode::Fast;
};

/// N(z): total offspring of z independent parents.
std::uint64_t sample_offspring_total(const OffspringLaw& law, std::uint64_t z, RandomStream& rng,
                                     const SamplerOptions& options = {});

struct Trajectory {
  /// Z_0..Z_T. Escaped generations hold kEscapedCount.
  std::vector<std::uint64_t> counts;
  std::optional<std::size_t> absorbed_at;
  std::optional<std::size_t> escaped_at;
  std::size_t horizon = 0;
};

/// One generation of the (possibly controlled) process: the size of
/// generation `generation` given Z_{generation-1} = state.
///
/// Randomness comes from the Reproduction and Control streams of `rng`,
/// keyed by generation, so seed-matched runs share offspring draws.
std::uint64_t step(std::uint64_t state, const OffspringLaw& law, const ControlPolicy* policy,
                   std::size_t generation, History history, const TrialRng& rng,
                   const SamplerOptions& options = {});

struct BatchSpec {
  OffspringLaw law;
  std::optional<ControlPolicy> policy{};
  std::size_t horizon = 1;
  std::size_t trials = 1;
  std::uint64_t initial_size = 1;
  std::uint64_t master_seed = 0;
  /// 0 disables escape. Otherwise a trajectory reaching this size is marked
  /// escaped; see README for the exact semantics.
  std::uint64_t escape_size = 0;
  SamplerOptions sampler{};
  std::size_t failure_budget = 0;
  unsigned threads = 1;
  /// Full trajectories kept for the first trials (plotting).
  std::size_t keep_trajectories = 0;
};

/// Integer per-generation tallies over all trials.
struct GenerationTally {
  std::size_t zero = 0;
  std::size_t alive = 0;
  std::size_t escaped = 0;
  /// Sums over alive, non-escaped trials.
  long double sum = 0;
  long double sum_squares = 0;
};

struct TrialFailure {
  std::size_t trial;
  std::string kind;
  std::string message;
};

struct BatchResult {
  std::size_t trials = 0;
  std::size_t horizon = 0;
  std::size_t extinct_by_horizon = 0;
  double extinction_fraction = 0.0;
  /// NaN when no non-escaped trial survives.
  double mean_final_size_given_survival = 0.0;
  /// Trials with Z_n = 0, n = 0..T. Nondecreasing when 0 is absorbing.
  std::vector<std::size_t> per_generation_extinct_counts;
  std::vector<GenerationTally> tallies;
  /// First generation with Z_n = 0 per trial, when 0 is absorbing.
  std::vector<std::optional<std::size_t>> extinction_generation;
  std::size_t escaped = 0;
  bool zero_absorbing = true;
  std::vector<TrialFailure> failures;
  std::vector<Trajectory> sample;
  /// A finite horizon only lower-bounds the extinction probability.
  const char* caveat = "extinction_fraction counts extinctions up to the horizon; it underestimates q";

  double mean_given_alive(std::size_t generation) const;
  /// Mean over non-escaped trials, zeros included.
  double mean(std::size_t generation) const;
};

/// Simulates one trial into `out`. The trial function may throw; failures
/// are charged against the batch failure budget.
using TrialFunction = std::function<void(std::size_t trial, Trajectory& out)>;

/// Runs `trials` trials over `threads` workers and reduces them in trial
/// order. Results do not depend on the worker count.
BatchResult run_trials(std::size_t trials, std::size_t horizon, unsigned threads,
                       std::size_t failure_budget, std::size_t keep_trajectories,
                       bool zero_absorbing, const TrialFunction& trial_fn);

/// Simulates a single trajectory of the batch.
void simulate_trajectory(const BatchSpec& spec, std::size_t trial, Trajectory& out);

BatchResult run_batch(const BatchSpec& spec);

/// Throws ConfigError when the spec is not runnable.
void validate(const BatchSpec& spec);

}  // namespace gwsim
