#include "gwsim/brs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwsim/errors.hpp"
#include "gwsim/random.hpp"

namespace gwsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kZ99 = 2.5758293035489004;

/// Smallest x with F(x) >= u, by bracketing bisection.
double invert_cdf(const std::function<double(double)>& cdf, double u) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; cdf(hi) < u; ++i) {
    lo = hi;
    hi *= 2.0;
    if (i > 2000) throw NumericFailure("cdf never reaches the requested level");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return hi;
}

void validate_custom(const ClaimDistribution& d) {
  if (std::abs(d.cdf(0.0)) > 1e-12) throw DomainError("custom cdf must satisfy F(0) = 0");
  if (std::abs(d.partial_mean(0.0)) > 1e-12) throw DomainError("custom partial mean must satisfy PM(0) = 0");
  double prev_x = 0.0;
  double prev_f = 0.0;
  double prev_pm = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double x = d.quantile(i / 100.0);
    const double f = d.cdf(x);
    const double pm = d.partial_mean(x);
    const double slack = 1e-9 * std::max(1.0, std::abs(pm));
    if (x < prev_x || f + 1e-12 < prev_f || pm + slack < prev_pm)
      throw DomainError("custom cdf / partial mean must be nondecreasing");
    if (pm > x * f + slack) throw DomainError("custom partial mean exceeds t F(t)");
    // |PM(x+h) - PM(x-h) - x (F(x+h) - F(x-h))| <= h (F(x+h) - F(x-h)).
    const double h = 1e-3 * std::max(x, 1e-9);
    const double df = d.cdf(x + h) - d.cdf(std::max(0.0, x - h));
    const double dpm = d.partial_mean(x + h) - d.partial_mean(std::max(0.0, x - h));
    if (std::abs(dpm - x * df) > h * df + 1e-9 * std::max(1.0, std::abs(dpm)))
      throw DomainError("custom partial mean is inconsistent with the cdf near " + std::to_string(x));
    prev_x = x;
    prev_f = f;
    prev_pm = pm;
  }
}

}  // namespace

ClaimDistribution::ClaimDistribution(Form form) : form_(std::move(form)) {
  std::visit(overloaded{
                 [](const Uniform& u) {
                   if (!(u.b > 0.0) || !std::isfinite(u.b)) throw DomainError("uniform bound must be > 0");
                 },
                 [](const Exponential& e) {
                   if (!(e.rate > 0.0) || !std::isfinite(e.rate))
                     throw DomainError("exponential rate must be > 0");
                 },
                 [this](const Custom& c) {
                   if (!c.cdf || !c.partial_mean) throw DomainError("custom claims need cdf and partial mean");
                   if (!(c.mean > 0.0)) throw DomainError("custom mean must be > 0 (may be inf)");
                   validate_custom(*this);
                 },
             },
             form_);
}

double ClaimDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [x](const Uniform& u) { return std::min(1.0, x / u.b); },
                        [x](const Exponential& e) { return -std::expm1(-e.rate * x); },
                        [x](const Custom& c) { return c.cdf(x); },
                    },
                    form_);
}

double ClaimDistribution::partial_mean(double t) const {
  if (t <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [t](const Uniform& u) {
                          const double x = std::min(t, u.b);
                          return x * x / (2.0 * u.b);
                        },
                        [t](const Exponential& e) {
                          // (1 - e^{-rt}(1 + rt)) / r
                          const double rt = e.rate * t;
                          return (-std::expm1(-rt) - rt * std::exp(-rt)) / e.rate;
                        },
                        [t](const Custom& c) { return c.partial_mean(t); },
                    },
                    form_);
}

double ClaimDistribution::mean() const {
  return std::visit(overloaded{
                        [](const Uniform& u) { return u.b / 2.0; },
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [](const Custom& c) { return c.mean; },
                    },
                    form_);
}

double ClaimDistribution::quantile(double u) const {
  return std::visit(overloaded{
                        [u](const Uniform& d) { return u * d.b; },
                        [u](const Exponential& e) { return -std::log1p(-u) / e.rate; },
                        [u](const Custom& c) { return c.quantile ? c.quantile(u) : invert_cdf(c.cdf, u); },
                    },
                    form_);
}

std::string ClaimDistribution::describe() const {
  return std::visit(overloaded{
                        [](const Uniform& u) { return "uniform(0," + std::to_string(u.b) + ")"; },
                        [](const Exponential& e) { return "exponential(" + std::to_string(e.rate) + ")"; },
                        [](const Custom& c) { return c.label; },
                    },
                    form_);
}

std::uint64_t Population::size() const noexcept {
  std::uint64_t n = 0;
  for (const auto& g : groups) n += g.count;
  return n;
}

void Population::validate() const {
  if (groups.empty()) throw DomainError("population has no groups");
  for (const auto& g : groups)
    if (g.count < 1) throw DomainError("group counts must be positive");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw DomainError("budget must be > 0");
}

std::size_t stopping_time(std::span<const double> claims, double budget) {
  if (!(budget > 0.0)) throw DomainError("budget must be > 0");
  std::vector<double> sorted(claims.begin(), claims.end());
  for (double c : sorted)
    if (!(c > 0.0)) throw DomainError("claims must be positive");
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  std::size_t k = 0;
  for (double c : sorted) {
    acc += c;
    if (acc > budget) break;
    ++k;
  }
  return k;
}

namespace {

double mass_up_to(const Population& pop, double t) {
  double acc = 0.0;
  for (const auto& g : pop.groups) acc += static_cast<double>(g.count) * g.distribution.partial_mean(t);
  return acc;
}

}  // namespace

double solve_threshold(const Population& pop, double tol) {
  pop.validate();
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  double total_mass = 0.0;
  for (const auto& g : pop.groups) total_mass += static_cast<double>(g.count) * g.distribution.mean();
  if (total_mass <= pop.budget)
    throw BudgetExceedsMass("expected total claim mass " + std::to_string(total_mass) +
                            " does not exceed budget " + std::to_string(pop.budget));

  const double s = pop.budget;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; mass_up_to(pop, hi) < s; ++i) {
    lo = hi;
    hi *= 2.0;
    if (i > 2000) throw NumericFailure("threshold bracket did not close");
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double residual = mass_up_to(pop, mid) - s;
    if (std::abs(residual) <= tol * s) return mid;
    if (mid <= lo || mid >= hi) break;
    (residual < 0.0 ? lo : hi) = mid;
  }
  for (double t : {lo, hi})
    if (std::abs(mass_up_to(pop, t) - s) <= tol * s) return t;
  throw NumericFailure("threshold bisection did not reach tolerance");
}

BrsBound brs_bound(const Population& pop, double tol) {
  BrsBound out;
  try {
    const double t = solve_threshold(pop, tol);
    out.threshold = t;
    out.bound = 0.0;
    for (const auto& g : pop.groups) out.bound += static_cast<double>(g.count) * g.distribution.cdf(t);
  } catch (const BudgetExceedsMass&) {
    out.budget_exceeds_mass = true;
    out.bound = static_cast<double>(pop.size());
  }
  return out;
}

const char* to_string(ClaimSampling mode) noexcept {
  return mode == ClaimSampling::Independent ? "independent" : "comonotone";
}

StopEstimate estimate_expected_stop(const Population& pop, std::size_t trials, std::uint64_t seed,
                                    ClaimSampling mode) {
  pop.validate();
  if (trials < 1) throw DomainError("trials must be >= 1");
  std::vector<double> claims;
  claims.reserve(pop.size());
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    RandomStream rng({seed, i, Stream::Claims});
    claims.clear();
    for (const auto& g : pop.groups) {
      if (mode == ClaimSampling::Comonotone) {
        const double x = g.distribution.quantile(rng.uniform());
        claims.insert(claims.end(), g.count, x);
      } else {
        for (std::uint64_t j = 0; j < g.count; ++j) claims.push_back(g.distribution.quantile(rng.uniform()));
      }
    }
    // u = 0 maps to a zero claim; claims are a.s. positive, so nudge it.
    for (double& c : claims)
      if (!(c > 0.0)) c = std::numeric_limits<double>::min();
    const double x = static_cast<double>(stopping_time(claims, pop.budget));
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  StopEstimate out;
  out.mean = mean;
  out.trials = trials;
  if (trials > 1) out.halfwidth = kZ99 * std::sqrt(m2 / static_cast<double>(trials - 1) / trials);
  return out;
}

}  // namespace gwsim
