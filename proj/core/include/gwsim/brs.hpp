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

namespace gwsim {

/// Absolutely continuous claim distribution on (0, inf) together with its
/// partial mean PM(t) = integral_0^t x dF(x).
class ClaimDistribution {
 public:
  struct Uniform {
    double b;
  };
  struct Exponential {
    double rate;
  };
  /// Both cdf and partial_mean are required. `mean` may be +inf. Without a
  /// quantile the cdf is inverted numerically.
  struct Custom {
    std::function<double(double)> cdf;
    std::function<double(double)> partial_mean;
    double mean;
    std::function<double(double)> quantile;
    std::string label = "custom";
  };
  using Form = std::variant<Uniform, Exponential, Custom>;

  /// Custom forms are validated on a quantile grid: F and PM nondecreasing,
  /// PM(t) <= t F(t), and PM increments matching t dF within the exact
  /// bound h dF. Throws DomainError on failure.
  ClaimDistribution(Form form);  // NOLINT(google-explicit-constructor)
  template <class Alt>
    requires(std::is_constructible_v<Form, Alt> && !std::is_same_v<std::remove_cvref_t<Alt>, Form>)
  ClaimDistribution(Alt&& alt) : ClaimDistribution(Form(std::forward<Alt>(alt))) {}  // NOLINT(google-explicit-constructor)

  static ClaimDistribution uniform(double b) { return Uniform{b}; }
  static ClaimDistribution exponential(double rate) { return Exponential{rate}; }

  double cdf(double x) const;
  double partial_mean(double t) const;
  double mean() const;
  double quantile(double u) const;
  const Form& form() const noexcept { return form_; }
  std::string describe() const;

 private:
  Form form_;
};

struct ClaimGroup {
  std::uint64_t count;
  ClaimDistribution distribution;
};

struct Population {
  std::vector<ClaimGroup> groups;
  /// Resource budget s > 0.
  double budget;

  std::uint64_t size() const noexcept;
  void validate() const;
};

/// N(n, s): how many of the smallest claims fit into the budget.
std::size_t stopping_time(std::span<const double> claims, double budget);

/// t(n, s): root of sum_i n_i PM_i(t) = s with |residual| <= tol * s.
/// Throws BudgetExceedsMass when sum_i n_i E X_i <= s.
double solve_threshold(const Population& population, double tol = 1e-12);

struct BrsBound {
  /// nullopt in the budget-exceeds-mass case.
  std::optional<double> threshold;
  /// sum_i n_i F_i(t), or n when the budget exceeds the mass.
  double bound;
  bool budget_exceeds_mass = false;
};

BrsBound brs_bound(const Population& population, double tol = 1e-12);

enum class ClaimSampling {
  Independent,
  /// One shared uniform per group: all claims of a group are equal.
  Comonotone,
};
const char* to_string(ClaimSampling mode) noexcept;

struct StopEstimate {
  double mean = 0.0;
  /// 99% normal-approximation halfwidth.
  double halfwidth = 0.0;
  std::size_t trials = 0;
};

/// Monte Carlo E[N(n, s)] over claim vectors drawn group by group.
StopEstimate estimate_expected_stop(const Population& population, std::size_t trials,
                                    std::uint64_t seed, ClaimSampling mode = ClaimSampling::Independent);

}  // namespace gwsim
