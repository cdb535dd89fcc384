#include "gwsim/law.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gwsim/errors.hpp"

namespace gwsim {

namespace {

constexpr double kTailMass = 1e-15;
constexpr double kSumTolerance = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Builds a pmf cache from a recurrence p_{k+1} = p_k * ratio(k) until the
/// remaining tail is negligible.
template <class Ratio>
std::vector<double> cache_from_recurrence(double p0, Ratio ratio, double mean) {
  std::vector<double> pmf{p0};
  double cumulative = p0;
  double pk = p0;
  for (std::uint64_t k = 0;; ++k) {
    pk *= ratio(k);
    pmf.push_back(pk);
    cumulative += pk;
    if (1.0 - cumulative < kTailMass && static_cast<double>(k) > mean) break;
    if (pmf.size() > (1u << 22)) throw NumericFailure("pmf cache did not converge");
  }
  while (pmf.size() > 1 && pmf.back() == 0.0) pmf.pop_back();
  return pmf;
}

}  // namespace

AliasTable::AliasTable(std::span<const double> probabilities)
    : cutoff_(probabilities.size()), alias_(probabilities.size()) {
  const std::size_t n = probabilities.size();
  if (n == 0) throw DomainError("alias table needs at least one outcome");
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);

  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probabilities[i] / total * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
    alias_[i] = i;
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    cutoff_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t i : large) cutoff_[i] = 1.0;
  for (std::size_t i : small) cutoff_[i] = 1.0;
}

OffspringLaw::OffspringLaw(LawKind kind, std::vector<double> pmf)
    : kind_(std::move(kind)), pmf_(std::move(pmf)), table_(pmf_) {}

OffspringLaw OffspringLaw::explicit_pmf(std::span<const std::pair<std::uint64_t, double>> pairs) {
  if (pairs.empty()) throw DomainError("explicit pmf is empty");
  std::uint64_t kmax = 0;
  for (const auto& [k, p] : pairs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("pmf entries must be finite and >= 0");
    kmax = std::max(kmax, k);
  }
  if (kmax > (1u << 24)) throw DomainError("explicit pmf support too large");
  std::vector<double> pmf(kmax + 1, 0.0);
  for (const auto& [k, p] : pairs) pmf[k] += p;
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (std::abs(total - 1.0) > kSumTolerance) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "pmf sums to %.17g, expected 1", total);
    throw DomainError(buf);
  }
  for (double& p : pmf) p /= total;
  while (pmf.size() > 1 && pmf.back() == 0.0) pmf.pop_back();
  return OffspringLaw(laws::Explicit{pmf}, pmf);
}

OffspringLaw OffspringLaw::explicit_pmf(
    std::initializer_list<std::pair<std::uint64_t, double>> pairs) {
  return explicit_pmf(std::span<const std::pair<std::uint64_t, double>>(pairs.begin(), pairs.size()));
}

OffspringLaw OffspringLaw::poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("Poisson lambda must be > 0");
  if (lambda > 1e4) throw DomainError("Poisson lambda too large for the sampling cache");
  auto pmf = cache_from_recurrence(
      std::exp(-lambda), [lambda](std::uint64_t k) { return lambda / static_cast<double>(k + 1); },
      lambda);
  return OffspringLaw(laws::Poisson{lambda}, std::move(pmf));
}

OffspringLaw OffspringLaw::geometric(double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("geometric r must lie in (0, 1)");
  if (r > 0.9999) throw DomainError("geometric r too close to 1 for the sampling cache");
  auto pmf = cache_from_recurrence(1.0 - r, [r](std::uint64_t) { return r; }, r / (1.0 - r));
  return OffspringLaw(laws::Geometric{r}, std::move(pmf));
}

OffspringLaw OffspringLaw::binomial(std::uint32_t n, double p) {
  if (n == 0) throw DomainError("binomial n must be positive");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial p must lie in (0, 1)");
  std::vector<double> pmf(n + 1);
  for (std::uint32_t k = 0; k <= n; ++k) {
    const double log_choose =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    pmf[k] = std::exp(log_choose + k * std::log(p) + (n - k) * std::log1p(-p));
  }
  return OffspringLaw(laws::Binomial{n, p}, std::move(pmf));
}

double OffspringLaw::pgf(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("pgf argument must lie in [0, 1]");
  return std::visit(
      overloaded{
          [s](const laws::Explicit& e) {
            double acc = 0.0;
            for (auto it = e.pmf.rbegin(); it != e.pmf.rend(); ++it) acc = acc * s + *it;
            return acc;
          },
          [s](const laws::Poisson& p) { return std::exp(p.lambda * (s - 1.0)); },
          [s](const laws::Geometric& g) { return (1.0 - g.r) / (1.0 - g.r * s); },
          [s](const laws::Binomial& b) { return std::pow(1.0 - b.p + b.p * s, b.n); },
      },
      kind_);
}

double OffspringLaw::mean() const noexcept {
  return std::visit(overloaded{
                        [](const laws::Explicit& e) {
                          double m = 0.0;
                          for (std::size_t k = 0; k < e.pmf.size(); ++k) m += k * e.pmf[k];
                          return m;
                        },
                        [](const laws::Poisson& p) { return p.lambda; },
                        [](const laws::Geometric& g) { return g.r / (1.0 - g.r); },
                        [](const laws::Binomial& b) { return b.n * b.p; },
                    },
                    kind_);
}

double OffspringLaw::variance() const noexcept {
  return std::visit(overloaded{
                        [this](const laws::Explicit& e) {
                          const double m = mean();
                          double v = 0.0;
                          for (std::size_t k = 0; k < e.pmf.size(); ++k)
                            v += (k - m) * (k - m) * e.pmf[k];
                          return v;
                        },
                        [](const laws::Poisson& p) { return p.lambda; },
                        [](const laws::Geometric& g) { return g.r / ((1.0 - g.r) * (1.0 - g.r)); },
                        [](const laws::Binomial& b) { return b.n * b.p * (1.0 - b.p); },
                    },
                    kind_);
}

bool OffspringLaw::finite_support() const noexcept {
  return std::holds_alternative<laws::Explicit>(kind_) ||
         std::holds_alternative<laws::Binomial>(kind_);
}

std::string OffspringLaw::describe() const {
  char buf[128];
  std::visit(overloaded{
                 [&](const laws::Explicit& e) {
                   std::snprintf(buf, sizeof buf, "explicit(support=0..%zu)", e.pmf.size() - 1);
                 },
                 [&](const laws::Poisson& p) { std::snprintf(buf, sizeof buf, "poisson(%g)", p.lambda); },
                 [&](const laws::Geometric& g) { std::snprintf(buf, sizeof buf, "geometric(%g)", g.r); },
                 [&](const laws::Binomial& b) {
                   std::snprintf(buf, sizeof buf, "binomial(%u,%g)", b.n, b.p);
                 },
             },
             kind_);
  return buf;
}

ExtinctionResult extinction_probability(const OffspringLaw& law, double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  ExtinctionResult out;
  const double p0 = law.pgf(0.0);
  if (p0 == 0.0) {
    out.q = 0.0;
    return out;
  }
  const double m = law.mean();
  if (std::abs(m - 1.0) < 1e-9) {
    out.q = 1.0;
    out.critical = true;
    return out;
  }
  if (m < 1.0) {
    out.q = 1.0;
    return out;
  }

  // Iterates increase monotonically to q.
  constexpr std::size_t kMaxIterations = 1'000'000;
  double s = 0.0;
  for (std::size_t i = 1; i <= kMaxIterations; ++i) {
    const double next = law.pgf(s);
    out.iterations = i;
    if (next < s) throw NumericFailure("fixed-point iterates lost monotonicity");
    const double residual = std::abs(law.pgf(next) - next);
    if (residual <= tol) {
      out.q = next;
      out.residual = residual;
      return out;
    }
    const bool stalled = (next - s) <= tol * std::max(next, 1e-300);
    s = next;
    if (stalled) break;
  }

  // Bisection on h(s) = f(s) - s, positive on [0, q) and negative on (q, 1).
  out.used_bisection = true;
  double lo = s;
  double hi = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double cand = 1.0 - std::ldexp(1.0, -k);
    if (cand <= lo) continue;
    if (law.pgf(cand) - cand < 0.0) {
      hi = cand;
      break;
    }
  }
  for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (law.pgf(mid) - mid > 0.0 ? lo : hi) = mid;
    ++out.iterations;
  }
  out.q = lo;
  out.residual = std::abs(law.pgf(lo) - lo);
  if (out.residual > tol) throw NumericFailure("extinction solver did not reach tolerance");
  return out;
}

}  // namespace gwsim
