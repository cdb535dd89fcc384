#include "gwsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <type_traits>

#include "gwsim/errors.hpp"

namespace gwsim {

namespace {

constexpr std::uint64_t kShortcutThreshold = 64;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void overflow(std::uint64_t cap) {
  throw PopulationOverflow("generation total exceeds population cap " + std::to_string(cap));
}

std::uint64_t checked(std::uint64_t total, std::uint64_t cap) {
  if (total > cap) overflow(cap);
  return total;
}

std::uint64_t binomial_draw(std::uint64_t n, double p, RandomStream& rng) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<std::uint64_t>(n, p)(rng);
}

/// Multinomial split of z parents over a finite support by successive
/// conditional binomials.
std::uint64_t explicit_aggregate(std::span<const double> pmf, std::uint64_t z, RandomStream& rng,
                                 std::uint64_t cap) {
  std::uint64_t remaining = z;
  double remaining_mass = 1.0;
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < pmf.size() && remaining > 0; ++k) {
    if (pmf[k] == 0.0) continue;
    std::uint64_t count;
    if (k + 1 == pmf.size()) {
      count = remaining;
    } else {
      const double p = std::clamp(pmf[k] / remaining_mass, 0.0, 1.0);
      count = binomial_draw(remaining, p, rng);
    }
    remaining -= count;
    remaining_mass -= pmf[k];
    if (k > 0 && count > (cap - total) / k) overflow(cap);
    total += count * k;
  }
  return total;
}

}  // namespace

std::uint64_t sample_offspring_total(const OffspringLaw& law, std::uint64_t z, RandomStream& rng,
                                     const SamplerOptions& options) {
  if (z == 0) return 0;
  const std::uint64_t cap = options.population_cap;
  if (options.mode == SamplingMode::Fast && z > kShortcutThreshold) {
    const long double expected = static_cast<long double>(z) * law.mean();
    // Far above the cap the aggregate would overflow the samplers too.
    if (expected > 4.0L * static_cast<long double>(cap) + 1e6L) overflow(cap);
    return std::visit(
        overloaded{
            [&](const laws::Poisson& p) {
              return checked(std::poisson_distribution<std::uint64_t>(
                                 static_cast<double>(z) * p.lambda)(rng),
                             cap);
            },
            [&](const laws::Geometric& g) {
              return checked(
                  std::negative_binomial_distribution<std::uint64_t>(z, 1.0 - g.r)(rng), cap);
            },
            [&](const laws::Binomial& b) {
              return checked(binomial_draw(z * b.n, b.p, rng), cap);
            },
            [&](const laws::Explicit& e) { return checked(explicit_aggregate(e.pmf, z, rng, cap), cap); },
        },
        law.kind());
  }
  const AliasTable& table = law.table();
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < z; ++i) {
    total += table.sample(rng.uniform());
    if (total > cap) overflow(cap);
  }
  return total;
}

std::uint64_t step(std::uint64_t state, const OffspringLaw& law, const ControlPolicy* policy,
                   std::size_t generation, History history, const TrialRng& rng,
                   const SamplerOptions& options) {
  if (generation == 0) throw DomainError("step needs generation >= 1");
  RandomStream reproduction = RandomStream(rng.key(Stream::Reproduction)).substream(generation);
  if (policy == nullptr) return sample_offspring_total(law, state, reproduction, options);

  return std::visit(
      overloaded{
          [&](const policies::Truncation& t) {
            return apply_truncation(sample_offspring_total(law, state, reproduction, options),
                                    generation, t.g);
          },
          [&](const policies::Absorbing& a) {
            RandomStream control = RandomStream(rng.key(Stream::Control)).substream(generation);
            return apply_absorption(sample_offspring_total(law, state, reproduction, options),
                                    generation, a.rule, history, control);
          },
          [&](const policies::Phi& p) { return apply_phi(state, p.phi, law, reproduction, options); },
      },
      *policy);
}

namespace {

/// Next state of an escaped trajectory (true size >= escape). Returns
/// nullopt while the size stays unknown.
std::optional<std::uint64_t> escaped_step(const BatchSpec& spec, std::size_t generation,
                                          History history, const TrialRng& rng) {
  if (!spec.policy) return std::nullopt;
  const std::uint64_t level = spec.escape_size;
  const std::uint64_t next = std::visit(
      overloaded{
          [&](const policies::Truncation& t) { return apply_truncation(level, generation, t.g); },
          [&](const policies::Absorbing& a) -> std::uint64_t {
            if (const auto* lb = std::get_if<rules::LowerBoundary>(&a.rule)) {
              if (lb->b(generation) > level)
                throw NumericFailure("lower boundary exceeds escape_size; raise escape_size");
            }
            RandomStream control = RandomStream(rng.key(Stream::Control)).substream(generation);
            return apply_absorption(level, generation, a.rule, history, control);
          },
          [&](const policies::Phi&) -> std::uint64_t {
            throw ConfigError("escape_size is not supported with phi policies");
          },
      },
      *spec.policy);
  if (next >= level) return std::nullopt;
  return next;
}

struct Accumulator {
  std::size_t zero = 0;
  std::size_t alive = 0;
  std::size_t escaped = 0;
  unsigned __int128 sum = 0;
  unsigned __int128 sum_squares = 0;
};

}  // namespace

void simulate_trajectory(const BatchSpec& spec, std::size_t trial, Trajectory& out) {
  const ControlPolicy* policy = spec.policy ? &*spec.policy : nullptr;
  const bool absorbing = zero_is_absorbing(policy);
  const TrialRng rng{spec.master_seed, trial};

  out.counts.clear();
  out.counts.reserve(spec.horizon + 1);
  out.counts.push_back(spec.initial_size);
  out.absorbed_at.reset();
  out.escaped_at.reset();
  out.horizon = spec.horizon;

  std::uint64_t state = spec.initial_size;
  bool escaped = false;
  if (spec.escape_size > 0 && state >= spec.escape_size) {
    escaped = true;
    out.escaped_at = 0;
    out.counts[0] = kEscapedCount;
  }
  if (absorbing && state == 0) out.absorbed_at = 0;

  for (std::size_t n = 1; n <= spec.horizon; ++n) {
    if (absorbing && state == 0) {
      out.counts.push_back(0);
      continue;
    }
    const History history(out.counts);
    std::uint64_t next;
    if (escaped) {
      const auto exact = escaped_step(spec, n, history, rng);
      if (!exact) {
        out.counts.push_back(kEscapedCount);
        continue;
      }
      escaped = false;
      next = *exact;
    } else {
      next = step(state, spec.law, policy, n, history, rng, spec.sampler);
    }
    if (spec.escape_size > 0 && next >= spec.escape_size) {
      escaped = true;
      if (!out.escaped_at) out.escaped_at = n;
      out.counts.push_back(kEscapedCount);
      continue;
    }
    state = next;
    out.counts.push_back(state);
    if (absorbing && state == 0) out.absorbed_at = n;
  }
}

BatchResult run_trials(std::size_t trials, std::size_t horizon, unsigned threads,
                       std::size_t failure_budget, std::size_t keep_trajectories,
                       bool zero_absorbing, const TrialFunction& trial_fn) {
  threads = std::max(1u, threads);
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));

  std::vector<std::optional<std::size_t>> extinction(trials);
  std::vector<char> failed(trials, 0);
  std::vector<Trajectory> kept(std::min(keep_trajectories, trials));
  std::vector<std::vector<Accumulator>> partial(threads, std::vector<Accumulator>(horizon + 1));
  std::vector<std::vector<TrialFailure>> failures(threads);

  auto worker = [&](unsigned w) {
    const std::size_t begin = trials * w / threads;
    const std::size_t end = trials * (w + 1) / threads;
    auto& acc = partial[w];
    Trajectory traj;
    for (std::size_t i = begin; i < end; ++i) {
      try {
        trial_fn(i, traj);
      } catch (const Error& e) {
        failed[i] = 1;
        failures[w].push_back({i, e.kind(), e.what()});
        continue;
      }
      for (std::size_t n = 0; n <= horizon; ++n) {
        const std::uint64_t c = n < traj.counts.size() ? traj.counts[n] : 0;
        if (c == kEscapedCount) {
          ++acc[n].escaped;
        } else if (c == 0) {
          ++acc[n].zero;
        } else {
          ++acc[n].alive;
          acc[n].sum += c;
          acc[n].sum_squares += static_cast<unsigned __int128>(c) * c;
        }
      }
      if (zero_absorbing) extinction[i] = traj.absorbed_at;
      if (i < kept.size()) {
        kept[i] = traj;
        kept[i].counts.resize(horizon + 1, 0);
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  BatchResult out;
  for (auto& f : failures) out.failures.insert(out.failures.end(), f.begin(), f.end());
  if (out.failures.size() > failure_budget) {
    const auto& first = out.failures.front();
    throw BatchAborted(first.trial, first.kind, first.message);
  }

  out.trials = trials - out.failures.size();
  out.horizon = horizon;
  out.zero_absorbing = zero_absorbing;
  out.tallies.resize(horizon + 1);
  out.per_generation_extinct_counts.resize(horizon + 1);
  for (std::size_t n = 0; n <= horizon; ++n) {
    Accumulator total;
    for (const auto& acc : partial) {
      total.zero += acc[n].zero;
      total.alive += acc[n].alive;
      total.escaped += acc[n].escaped;
      total.sum += acc[n].sum;
      total.sum_squares += acc[n].sum_squares;
    }
    auto& t = out.tallies[n];
    t.zero = total.zero;
    t.alive = total.alive;
    t.escaped = total.escaped;
    t.sum = static_cast<long double>(total.sum);
    t.sum_squares = static_cast<long double>(total.sum_squares);
    out.per_generation_extinct_counts[n] = total.zero;
  }
  out.extinction_generation.reserve(out.trials);
  for (std::size_t i = 0; i < trials; ++i) {
    if (!failed[i]) out.extinction_generation.push_back(extinction[i]);
  }
  out.extinct_by_horizon = out.tallies[horizon].zero;
  out.escaped = out.tallies[horizon].escaped;
  out.extinction_fraction =
      out.trials ? static_cast<double>(out.extinct_by_horizon) / static_cast<double>(out.trials) : 0.0;
  out.mean_final_size_given_survival = out.mean_given_alive(horizon);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!failed[i]) out.sample.push_back(std::move(kept[i]));
  }
  return out;
}

double BatchResult::mean_given_alive(std::size_t generation) const {
  const auto& t = tallies.at(generation);
  if (t.alive == 0) return std::nan("");
  return static_cast<double>(t.sum / static_cast<long double>(t.alive));
}

double BatchResult::mean(std::size_t generation) const {
  const auto& t = tallies.at(generation);
  const std::size_t counted = t.alive + t.zero;
  if (counted == 0) return std::nan("");
  return static_cast<double>(t.sum / static_cast<long double>(counted));
}

void validate(const BatchSpec& spec) {
  if (spec.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  if (spec.initial_size < 1) throw ConfigError("initial_size must be >= 1");
  if (spec.sampler.population_cap < 1) throw ConfigError("population_cap must be >= 1");
  if (spec.policy) {
    try {
      validate_policy(*spec.policy);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (spec.escape_size > 0) {
    if (!(spec.law.mean() > 1.0))
      throw ConfigError("escape_size requires a supercritical law (m > 1)");
    if (spec.escape_size > spec.sampler.population_cap)
      throw ConfigError("escape_size must not exceed population_cap");
    if (spec.policy) {
      const bool unsupported = std::visit(
          overloaded{
              [](const policies::Truncation&) { return false; },
              [](const policies::Absorbing& a) { return std::holds_alternative<rules::Custom>(a.rule); },
              [](const policies::Phi&) { return true; },
          },
          *spec.policy);
      if (unsupported)
        throw ConfigError("escape_size is only supported without policy, or with truncation, "
                          "disaster, lower-boundary and truncation-as-absorption rules");
    }
  }
}

BatchResult run_batch(const BatchSpec& spec) {
  validate(spec);
  const ControlPolicy* policy = spec.policy ? &*spec.policy : nullptr;
  return run_trials(spec.trials, spec.horizon, spec.threads, spec.failure_budget,
                    spec.keep_trajectories, zero_is_absorbing(policy),
                    [&spec](std::size_t trial, Trajectory& out) { simulate_trajectory(spec, trial, out); });
}

}  // namespace gwsim
