#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gwsim {

/// Walker/Vose alias table: O(1) draws from a finite pmf using one uniform.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> probabilities);

  /// Maps a uniform u in [0, 1) to an outcome index.
  std::size_t sample(double u) const noexcept {
    const double x = u * static_cast<double>(cutoff_.size());
    std::size_t i = static_cast<std::size_t>(x);
    if (i >= cutoff_.size()) i = cutoff_.size() - 1;
    return (x - static_cast<double>(i)) < cutoff_[i] ? i : alias_[i];
  }

  std::size_t size() const noexcept { return cutoff_.size(); }

 private:
  std::vector<double> cutoff_;
  std::vector<std::size_t> alias_;
};

namespace laws {
/// p_k stored by index k.
struct Explicit {
  std::vector<double> pmf;
};
struct Poisson {
  double lambda;
};
/// p_k = (1 - r) r^k, k >= 0.
struct Geometric {
  double r;
};
struct Binomial {
  std::uint32_t n;
  double p;
};
}  // namespace laws

using LawKind = std::variant<laws::Explicit, laws::Poisson, laws::Geometric, laws::Binomial>;

/// Offspring distribution {p_k} of a Galton-Watson process. Immutable once
/// built; safe to share between threads.
///
/// Infinite-support laws keep a pmf cache truncated where the tail mass
/// drops below 1e-15. The cache only backs sampling: pgf and mean use the
/// closed forms.
class OffspringLaw {
 public:
  /// Explicit pmf from (k, p_k) pairs. Repeated k accumulate. The total must
  /// be 1 within 1e-12; it is then renormalized exactly.
  static OffspringLaw explicit_pmf(std::span<const std::pair<std::uint64_t, double>> pairs);
  static OffspringLaw explicit_pmf(std::initializer_list<std::pair<std::uint64_t, double>> pairs);
  static OffspringLaw poisson(double lambda);
  static OffspringLaw geometric(double r);
  static OffspringLaw binomial(std::uint32_t n, double p);

  const LawKind& kind() const noexcept { return kind_; }

  /// f(s) = sum_k p_k s^k for s in [0, 1].
  double pgf(double s) const;
  double mean() const noexcept;
  double variance() const noexcept;

  /// p_k from the cache (exact for explicit laws, 0 beyond the cache).
  double probability(std::uint64_t k) const noexcept {
    return k < pmf_.size() ? pmf_[k] : 0.0;
  }
  std::span<const double> pmf_cache() const noexcept { return pmf_; }
  const AliasTable& table() const noexcept { return table_; }

  bool finite_support() const noexcept;
  /// Largest k with p_k > 0 for finite-support laws, else the cache bound.
  std::uint64_t max_offspring() const noexcept { return pmf_.empty() ? 0 : pmf_.size() - 1; }

  std::string describe() const;

 private:
  explicit OffspringLaw(LawKind kind, std::vector<double> pmf);

  LawKind kind_;
  std::vector<double> pmf_;
  AliasTable table_;
};

struct ExtinctionResult {
  double q = 1.0;
  std::size_t iterations = 0;
  /// |f(q) - q|
  double residual = 0.0;
  /// Set when |m - 1| < 1e-9; q is then reported as 1.
  bool critical = false;
  bool used_bisection = false;
};

/// Smallest root of f(s) = s on [0, 1], by fixed-point iteration from 0
/// with a bisection fallback when iteration stalls.
ExtinctionResult extinction_probability(const OffspringLaw& law, double tol = 1e-13);

}  // namespace gwsim
