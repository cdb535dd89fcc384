#include "gwsim/bisexual.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gwsim/errors.hpp"

namespace gwsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t kMonotoneGrid = 64;
constexpr double kZ99 = 2.5758293035489004;
constexpr std::uint64_t kEnumerationLimit = 24;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

void check_monotone_at(const MatingFunction& m, std::uint64_t x, std::uint64_t y) {
  const std::uint64_t here = m(x, y);
  if (m(x + 1, y) < here || m(x, y + 1) < here)
    throw InvalidRule(m.describe() + " is not nondecreasing at (" + std::to_string(x) + ", " +
                      std::to_string(y) + ")");
}

}  // namespace

MatingFunction::MatingFunction(Form form) : form_(std::move(form)) {
  if (const auto* d = std::get_if<DaleyPolygamy>(&form_)) {
    if (d->d < 1) throw DomainError("polygamy degree d must be >= 1");
  }
  if (const auto* c = std::get_if<Custom>(&form_)) {
    if (!c->fn) throw DomainError("custom mating function is empty");
    for (std::uint64_t x = 0; x < kMonotoneGrid; ++x)
      for (std::uint64_t y = 0; y < kMonotoneGrid; ++y) check_monotone_at(*this, x, y);
  }
}

std::uint64_t MatingFunction::operator()(std::uint64_t females, std::uint64_t males) const {
  return std::visit(overloaded{
                        [&](const Min&) { return std::min(females, males); },
                        [&](const DaleyMonogamy&) { return males > 0 ? females : std::uint64_t{0}; },
                        [&](const DaleyPolygamy& p) {
                          const std::uint64_t cap =
                              males > std::numeric_limits<std::uint64_t>::max() / p.d
                                  ? std::numeric_limits<std::uint64_t>::max()
                                  : p.d * males;
                          return std::min(females, cap);
                        },
                        [&](const Custom& c) { return c.fn(females, males); },
                    },
                    form_);
}

std::string MatingFunction::describe() const {
  return std::visit(overloaded{
                        [](const Min&) { return std::string("min"); },
                        [](const DaleyMonogamy&) { return std::string("daley_monogamy"); },
                        [](const DaleyPolygamy& p) { return "daley_polygamy(d=" + std::to_string(p.d) + ")"; },
                        [](const Custom& c) { return c.label; },
                    },
                    form_);
}

BisexualState initial_units(std::uint64_t units) { return {0, 0, units, 0}; }

BisexualState bisexual_step(const BisexualState& state, const OffspringLaw& law, double alpha,
                            const MatingFunction& mating, const TrialRng& rng,
                            const SamplerOptions& options) {
  check_alpha(alpha);
  BisexualState next;
  next.generation = state.generation + 1;
  if (state.units == 0) return next;

  RandomStream reproduction = RandomStream(rng.key(Stream::Reproduction)).substream(next.generation);
  const std::uint64_t total = sample_offspring_total(law, state.units, reproduction, options);
  RandomStream sex = RandomStream(rng.key(Stream::Sex)).substream(next.generation);
  next.males = total == 0 ? 0 : std::binomial_distribution<std::uint64_t>(total, alpha)(sex);
  next.females = total - next.males;
  next.units = mating(next.females, next.males);
  if (std::holds_alternative<MatingFunction::Custom>(mating.form()))
    check_monotone_at(mating, next.females, next.males);
  return next;
}

UnitEstimate mean_reproduction_per_unit(std::uint64_t k, const OffspringLaw& law, double alpha,
                                        const MatingFunction& mating, std::size_t trials,
                                        std::uint64_t seed) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (trials < 1) throw DomainError("trials must be >= 1");
  check_alpha(alpha);
  // Welford over per-trial unit counts.
  double mean = 0.0;
  double m2 = 0.0;
  const BisexualState start = initial_units(k);
  for (std::size_t i = 0; i < trials; ++i) {
    const auto next = bisexual_step(start, law, alpha, mating, TrialRng{seed, i});
    const double x = static_cast<double>(next.units);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  UnitEstimate out;
  out.trials = trials;
  out.mean = mean / static_cast<double>(k);
  if (trials > 1) {
    const double sd = std::sqrt(m2 / static_cast<double>(trials - 1));
    out.halfwidth = kZ99 * sd / std::sqrt(static_cast<double>(trials)) / static_cast<double>(k);
  }
  return out;
}

std::optional<double> exact_mean_reproduction_per_unit(std::uint64_t k, const OffspringLaw& law,
                                                       double alpha, const MatingFunction& mating) {
  if (k < 1) throw DomainError("k must be >= 1");
  check_alpha(alpha);
  if (!law.finite_support()) return std::nullopt;
  const std::uint64_t kmax = law.max_offspring();
  if (kmax > 0 && k > kEnumerationLimit / kmax) return std::nullopt;

  // Distribution of the total offspring of k units.
  const auto pmf = law.pmf_cache();
  std::vector<double> total{1.0};
  for (std::uint64_t u = 0; u < k; ++u) {
    std::vector<double> next(total.size() + pmf.size() - 1, 0.0);
    for (std::size_t a = 0; a < total.size(); ++a)
      for (std::size_t b = 0; b < pmf.size(); ++b) next[a + b] += total[a] * pmf[b];
    total = std::move(next);
  }
  double expected = 0.0;
  for (std::size_t t = 0; t < total.size(); ++t) {
    if (total[t] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t males = 0; males <= t; ++males) {
      const double log_choose =
          std::lgamma(t + 1.0) - std::lgamma(males + 1.0) - std::lgamma(t - males + 1.0);
      const double p = std::exp(log_choose + males * std::log(alpha) + (t - males) * std::log1p(-alpha));
      inner += p * static_cast<double>(mating(t - males, males));
    }
    expected += total[t] * inner;
  }
  return expected / static_cast<double>(k);
}

const char* to_string(TailStatus s) noexcept {
  switch (s) {
    case TailStatus::ClearlyBelowOne:
      return "clearly_below_one";
    case TailStatus::Boundary:
      return "boundary";
    case TailStatus::AboveOne:
      return "above_one";
  }
  return "?";
}

const char* to_string(ExtinctionEvidence e) noexcept {
  switch (e) {
    case ExtinctionEvidence::SupportsCertainExtinction:
      return "supports_certain_extinction";
    case ExtinctionEvidence::BoundaryCase:
      return "boundary_case";
    case ExtinctionEvidence::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

UnitReproductionReport unit_reproduction_check(const OffspringLaw& law, double alpha, const MatingFunction& mating,
                              std::uint64_t k_max, std::size_t trials_per_k, std::uint64_t seed) {
  if (k_max < 2) throw DomainError("k_max must be >= 2");
  std::vector<std::uint64_t> grid;
  for (std::uint64_t k = 1; k < k_max; k *= 2) grid.push_back(k);
  grid.push_back(k_max);

  UnitReproductionReport out;
  for (std::uint64_t k : grid) {
    UnitEstimate est;
    if (auto exact = exact_mean_reproduction_per_unit(k, law, alpha, mating)) {
      est.mean = *exact;
      est.exact = true;
    } else {
      est = mean_reproduction_per_unit(k, law, alpha, mating, trials_per_k, mix64(seed ^ mix64(k)));
    }
    out.points.push_back({k, est});
  }

  // Built-in forms satisfy M(x, y) <= x, so m(k) <= m (1 - alpha) exactly.
  // Custom forms: bounded when the last increment is within confidence slack
  // or the increments shrink geometrically along the doubling grid.
  if (!std::holds_alternative<MatingFunction::Custom>(mating.form())) {
    out.bounded = true;
  } else {
    const std::size_t n = out.points.size();
    auto slack = [&](std::size_t i, std::size_t j) {
      const auto& a = out.points[i].estimate;
      const auto& b = out.points[j].estimate;
      return a.halfwidth + b.halfwidth + 0.01 * std::max(1.0, std::abs(b.mean));
    };
    auto rise = [&](std::size_t i) { return out.points[i].estimate.mean - out.points[i - 1].estimate.mean; };
    out.bounded = rise(n - 1) <= slack(n - 1, n - 2) ||
                  (n >= 3 && rise(n - 1) <= 0.8 * rise(n - 2) + slack(n - 1, n - 2));
  }

  // Tail: grid points with k >= k_max / 4.
  bool all_below = true;
  bool any_above = false;
  for (const auto& p : out.points) {
    if (p.k * 4 < k_max) continue;
    const double upper = p.estimate.mean + p.estimate.halfwidth;
    const double lower = p.estimate.mean - p.estimate.halfwidth;
    if (lower > 1.0) any_above = true;
    if (!(upper < 1.0)) all_below = false;
  }
  out.tail = any_above ? TailStatus::AboveOne
             : all_below ? TailStatus::ClearlyBelowOne
                         : TailStatus::Boundary;
  if (out.bounded && out.tail == TailStatus::ClearlyBelowOne)
    out.evidence = ExtinctionEvidence::SupportsCertainExtinction;
  else if (out.bounded && out.tail == TailStatus::Boundary)
    out.evidence = ExtinctionEvidence::BoundaryCase;
  else
    out.evidence = ExtinctionEvidence::Inconclusive;
  return out;
}

BatchResult run_bisexual_batch(const BisexualBatchSpec& spec) {
  check_alpha(spec.alpha);
  if (spec.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  if (spec.initial_units < 1) throw ConfigError("initial units must be >= 1");
  return run_trials(spec.trials, spec.horizon, spec.threads, spec.failure_budget,
                    spec.keep_trajectories, true, [&spec](std::size_t trial, Trajectory& out) {
                      const TrialRng rng{spec.master_seed, trial};
                      out.counts.assign(1, spec.initial_units);
                      out.absorbed_at.reset();
                      out.escaped_at.reset();
                      out.horizon = spec.horizon;
                      BisexualState state = initial_units(spec.initial_units);
                      for (std::size_t n = 1; n <= spec.horizon; ++n) {
                        if (state.units == 0) {
                          out.counts.push_back(0);
                          continue;
                        }
                        state = bisexual_step(state, spec.law, spec.alpha, spec.mating, rng, spec.sampler);
                        out.counts.push_back(state.units);
                        if (state.units == 0) out.absorbed_at = n;
                      }
                    });
}

}  // namespace gwsim
