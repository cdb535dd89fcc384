#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gwsim/law.hpp"
#include "gwsim/random.hpp"

namespace gwsim {

struct SamplerOptions;
struct BatchResult;

enum class Rounding { Floor, Ceil };

/// Nonnegative integer function of a nonnegative integer argument, used for
/// truncation caps g(n), lower boundaries b(n) and control functions phi(x).
///
/// Symbolic forms carry enough structure for exact series classification;
/// `Custom` only supports numeric evaluation. Results are clamped at 0.
class IntegerFunction {
 public:
  struct Constant {
    std::uint64_t c;
  };
  /// max(min, round(a * log_base(x + 1) + c)). The lower clamp only moves
  /// finitely many values when a > 0.
  struct Logarithmic {
    double a;
    double base;
    Rounding rounding = Rounding::Floor;
    double c = 0.0;
    std::uint64_t min = 0;
  };
  /// floor(a * x + c)
  struct Linear {
    double a;
    double c;
  };
  /// values[x], holding the last value beyond the table.
  struct Table {
    std::vector<std::uint64_t> values;
  };
  struct Custom {
    std::function<std::uint64_t(std::uint64_t)> fn;
    std::string label = "custom";
  };
  using Form = std::variant<Constant, Logarithmic, Linear, Table, Custom>;

  IntegerFunction(Form form);  // NOLINT(google-explicit-constructor)
  template <class Alt>
    requires(std::is_constructible_v<Form, Alt> && !std::is_same_v<std::remove_cvref_t<Alt>, Form>)
  IntegerFunction(Alt&& alt) : IntegerFunction(Form(std::forward<Alt>(alt))) {}  // NOLINT(google-explicit-constructor)

  static IntegerFunction constant(std::uint64_t c) { return Constant{c}; }
  static IntegerFunction logarithmic(double a, double base, Rounding r = Rounding::Floor,
                                     double c = 0.0, std::uint64_t min = 0) {
    return Logarithmic{a, base, r, c, min};
  }
  static IntegerFunction linear(double a, double c) { return Linear{a, c}; }
  static IntegerFunction identity() { return Linear{1.0, 0.0}; }
  static IntegerFunction table(std::vector<std::uint64_t> v) { return Table{std::move(v)}; }
  static IntegerFunction custom(std::function<std::uint64_t(std::uint64_t)> fn,
                                std::string label = "custom") {
    return Custom{std::move(fn), std::move(label)};
  }

  std::uint64_t operator()(std::uint64_t x) const;
  const Form& form() const noexcept { return form_; }
  bool symbolic() const noexcept { return !std::holds_alternative<Custom>(form_); }
  std::string describe() const;

 private:
  Form form_;
};

/// Per-generation disaster probabilities delta_k, k >= 1.
class DisasterSchedule {
 public:
  /// delta_k = values[k-1]; zero beyond the table.
  struct Table {
    std::vector<double> values;
  };
  /// delta_k = min(1, c / k) for k >= start, zero before.
  struct Harmonic {
    double c;
    std::uint64_t start = 1;
  };
  struct Constant {
    double c;
  };
  using Form = std::variant<Table, Harmonic, Constant>;

  DisasterSchedule(Form form);  // NOLINT(google-explicit-constructor)
  template <class Alt>
    requires(std::is_constructible_v<Form, Alt> && !std::is_same_v<std::remove_cvref_t<Alt>, Form>)
  DisasterSchedule(Alt&& alt) : DisasterSchedule(Form(std::forward<Alt>(alt))) {}  // NOLINT(google-explicit-constructor)

  double operator()(std::uint64_t k) const noexcept;
  const Form& form() const noexcept { return form_; }
  /// Whether sum_k delta_k diverges.
  bool sum_diverges() const noexcept;

 private:
  Form form_;
};

/// Read-only history Z_0..Z_{n-1} handed to absorbing rules.
using History = std::span<const std::uint64_t>;

namespace rules {
/// A_n(l) = [l - g(n)]^+
struct TruncationAsAbsorption {
  IntegerFunction g;
};
/// All offspring absorbed with probability delta_n, independently of history.
struct Disaster {
  DisasterSchedule delta;
};
/// All offspring absorbed when l < b(n).
struct LowerBoundary {
  IntegerFunction b;
};
/// Arbitrary rule A_n(l) in [0, l]; must be a pure function of its inputs.
struct Custom {
  std::function<std::uint64_t(std::uint64_t offspring, std::size_t generation, History history,
                              RandomStream& rng)>
      absorbed;
  std::string label = "custom";
};
}  // namespace rules

using AbsorbingRule =
    std::variant<rules::TruncationAsAbsorption, rules::Disaster, rules::LowerBoundary, rules::Custom>;

namespace policies {
struct Truncation {
  IntegerFunction g;
};
struct Absorbing {
  AbsorbingRule rule;
};
struct Phi {
  IntegerFunction phi;
};
}  // namespace policies

using ControlPolicy = std::variant<policies::Truncation, policies::Absorbing, policies::Phi>;

/// Throws DomainError when the policy breaks its invariants (g(0) >= 1 for
/// truncation).
void validate_policy(const ControlPolicy& policy);

/// Whether state 0 stays absorbing under the policy (false only for phi with
/// phi(0) > 0).
bool zero_is_absorbing(const ControlPolicy* policy);

std::string describe(const ControlPolicy& policy);

/// min(g(generation), offspring)
std::uint64_t apply_truncation(std::uint64_t offspring, std::size_t generation,
                               const IntegerFunction& g);

/// offspring - A_n(offspring). Throws InvalidRule when a custom rule returns
/// a count outside [0, offspring].
std::uint64_t apply_absorption(std::uint64_t offspring, std::size_t generation,
                               const AbsorbingRule& rule, History history, RandomStream& rng);

/// Total offspring of phi(state) reproducing units.
std::uint64_t apply_phi(std::uint64_t state, const IntegerFunction& phi, const OffspringLaw& law,
                        RandomStream& rng, const SamplerOptions& options);

enum class Verdict { Divergent, Convergent, Inconclusive };
const char* to_string(Verdict v) noexcept;

struct CriterionVerdict {
  Verdict verdict = Verdict::Inconclusive;
  /// partial_sums[i] = sum_{n=1}^{i+1} base^{g(n)}
  std::vector<double> partial_sums;
  std::optional<double> fitted_decay_exponent;
  /// True when the verdict comes from a comparison test on a symbolic form.
  bool exact = false;
};

/// Classifies sum_n base^{g(n)}: exact on symbolic forms, otherwise by the
/// decay exponent fitted over the top decade (tolerance 0.05 around 1).
CriterionVerdict classify_power_series(double base, const IntegerFunction& g, std::size_t n_max);

/// Divergence of sum_n q^{g(n)}, which decides a.s. extinction of the
/// truncated process.
CriterionVerdict zubkov_criterion(double q, const IntegerFunction& g, std::size_t n_max);

/// Divergence of sum_n p^{g(n)} for p in (0, q]; a Divergent verdict is the
/// sufficient condition for a.s. extinction under an absorbing process whose
/// conditional mean stays below g.
CriterionVerdict expectation_criterion(double p, double q, const IntegerFunction& g,
                                       std::size_t n_max);

struct EnvelopeReport {
  /// Generations n >= 1 where the estimate of E(Z_n | Z_n > 0) exceeds g(n).
  std::vector<std::size_t> conditional_violations;
  /// Generations where the estimate of E(Z_n) exceeds g(n).
  std::vector<std::size_t> unconditional_violations;
  std::vector<double> conditional_mean;
  std::vector<double> unconditional_mean;
};

/// Estimates both envelope hypotheses across the trials of a batch. This is
/// empirical evidence only; it cannot validate the hypothesis itself.
EnvelopeReport envelope_check(const BatchResult& batch, const IntegerFunction& g);

}  // namespace gwsim
