#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gwsim/engine.hpp"
#include "gwsim/law.hpp"
#include "gwsim/random.hpp"

namespace gwsim {

/// Number of mating units formed by x females and y males. Nondecreasing in
/// each argument.
class MatingFunction {
 public:
  struct Min {};
  /// x * min(1, y)
  struct DaleyMonogamy {};
  /// min(x, d * y)
  struct DaleyPolygamy {
    std::uint64_t d;
  };
  struct Custom {
    std::function<std::uint64_t(std::uint64_t females, std::uint64_t males)> fn;
    std::string label = "custom";
  };
  using Form = std::variant<Min, DaleyMonogamy, DaleyPolygamy, Custom>;

  /// Custom forms are checked for monotonicity on [0, 64]^2; throws
  /// InvalidRule on failure.
  MatingFunction(Form form);  // NOLINT(google-explicit-constructor)
  template <class Alt>
    requires(std::is_constructible_v<Form, Alt> && !std::is_same_v<std::remove_cvref_t<Alt>, Form>)
  MatingFunction(Alt&& alt) : MatingFunction(Form(std::forward<Alt>(alt))) {}  // NOLINT(google-explicit-constructor)

  std::uint64_t operator()(std::uint64_t females, std::uint64_t males) const;
  const Form& form() const noexcept { return form_; }
  std::string describe() const;

 private:
  Form form_;
};

struct BisexualState {
  std::uint64_t females = 0;
  std::uint64_t males = 0;
  std::uint64_t units = 0;
  std::size_t generation = 0;
};

/// Initial state with `units` mating units and no recorded parents.
BisexualState initial_units(std::uint64_t units);

/// Mating units reproduce i.i.d. by `law`; each child is male with
/// probability alpha. Offspring totals use the Reproduction stream and the
/// sex split the Sex stream, both keyed by the new generation.
BisexualState bisexual_step(const BisexualState& state, const OffspringLaw& law, double alpha,
                            const MatingFunction& mating, const TrialRng& rng,
                            const SamplerOptions& options = {});

struct UnitEstimate {
  double mean = 0.0;
  /// 99% normal-approximation halfwidth; 0 for exact values.
  double halfwidth = 0.0;
  std::size_t trials = 0;
  bool exact = false;
};

/// Monte Carlo estimate of m(k) = E(Z_1 | Z_0 = k) / k.
UnitEstimate mean_reproduction_per_unit(std::uint64_t k, const OffspringLaw& law, double alpha,
                                        const MatingFunction& mating, std::size_t trials,
                                        std::uint64_t seed);

/// Exact m(k) by enumeration, available for finite-support laws with
/// k * max_offspring <= 24.
std::optional<double> exact_mean_reproduction_per_unit(std::uint64_t k, const OffspringLaw& law,
                                                       double alpha, const MatingFunction& mating);

enum class TailStatus { ClearlyBelowOne, Boundary, AboveOne };
enum class ExtinctionEvidence { SupportsCertainExtinction, BoundaryCase, Inconclusive };
const char* to_string(TailStatus s) noexcept;
const char* to_string(ExtinctionEvidence e) noexcept;

struct UnitReproductionPoint {
  std::uint64_t k;
  UnitEstimate estimate;
};

struct UnitReproductionReport {
  std::vector<UnitReproductionPoint> points;
  bool bounded = false;
  TailStatus tail = TailStatus::Boundary;
  /// Statistical evidence only; never a proof, and never a survival verdict.
  ExtinctionEvidence evidence = ExtinctionEvidence::Inconclusive;
};

/// Estimates m(k) on the grid k = 1, 2, 4, ..., k_max and checks whether it
/// stays bounded and eventually at most 1.
UnitReproductionReport unit_reproduction_check(const OffspringLaw& law, double alpha, const MatingFunction& mating,
                              std::uint64_t k_max, std::size_t trials_per_k, std::uint64_t seed);

struct BisexualBatchSpec {
  OffspringLaw law;
  double alpha = 0.5;
  MatingFunction mating = MatingFunction::Min{};
  std::uint64_t initial_units = 1;
  std::size_t horizon = 1;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  SamplerOptions sampler{};
  std::size_t failure_budget = 0;
  unsigned threads = 1;
  std::size_t keep_trajectories = 0;
};

/// Batch over the mating-unit process Z_n; counts in the result are units.
BatchResult run_bisexual_batch(const BisexualBatchSpec& spec);

}  // namespace gwsim
