#include "gwsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gwsim/engine.hpp"
#include "gwsim/errors.hpp"

namespace gwsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Snaps values within rounding noise of an integer so that e.g.
/// ceil(2 * log(3) / log(3)) is 2, not 3.
double snap(double x) {
  const double r = std::nearbyint(x);
  return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : x;
}

std::uint64_t to_count(double x) {
  if (!(x > 0.0)) return 0;
  if (x >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(x);
}

constexpr double kExponentSlack = 0.05;

}  // namespace

IntegerFunction::IntegerFunction(Form form) : form_(std::move(form)) {
  std::visit(overloaded{
                 [](const Constant&) {},
                 [](const Logarithmic& l) {
                   if (!(l.base > 1.0)) throw DomainError("logarithm base must be > 1");
                   if (!(l.a >= 0.0)) throw DomainError("logarithmic coefficient must be >= 0");
                 },
                 [](const Linear& l) {
                   if (!std::isfinite(l.a) || !std::isfinite(l.c))
                     throw DomainError("linear coefficients must be finite");
                 },
                 [](const Table& t) {
                   if (t.values.empty()) throw DomainError("function table is empty");
                 },
                 [](const Custom& c) {
                   if (!c.fn) throw DomainError("custom function is empty");
                 },
             },
             form_);
}

std::uint64_t IntegerFunction::operator()(std::uint64_t x) const {
  return std::visit(
      overloaded{
          [](const Constant& c) { return c.c; },
          [x](const Logarithmic& l) {
            const double v = snap(l.a * std::log(static_cast<double>(x) + 1.0) / std::log(l.base) + l.c);
            return std::max(l.min, to_count(l.rounding == Rounding::Floor ? std::floor(v) : std::ceil(v)));
          },
          [x](const Linear& l) { return to_count(std::floor(snap(l.a * static_cast<double>(x) + l.c))); },
          [x](const Table& t) { return x < t.values.size() ? t.values[x] : t.values.back(); },
          [x](const Custom& c) { return c.fn(x); },
      },
      form_);
}

std::string IntegerFunction::describe() const {
  char buf[160];
  std::visit(overloaded{
                 [&](const Constant& c) {
                   std::snprintf(buf, sizeof buf, "constant(%llu)", static_cast<unsigned long long>(c.c));
                 },
                 [&](const Logarithmic& l) {
                   const int len = std::snprintf(buf, sizeof buf, "%s(%g*log_%g(n+1)%+g)",
                                                 l.rounding == Rounding::Floor ? "floor" : "ceil", l.a, l.base, l.c);
                   if (l.min > 0 && len > 0 && static_cast<std::size_t>(len) < sizeof buf)
                     std::snprintf(buf + len, sizeof buf - len, " min %llu",
                                   static_cast<unsigned long long>(l.min));
                 },
                 [&](const Linear& l) { std::snprintf(buf, sizeof buf, "floor(%g*n%+g)", l.a, l.c); },
                 [&](const Table& t) { std::snprintf(buf, sizeof buf, "table[%zu]", t.values.size()); },
                 [&](const Custom& c) { std::snprintf(buf, sizeof buf, "%s", c.label.c_str()); },
             },
             form_);
  return buf;
}

DisasterSchedule::DisasterSchedule(Form form) : form_(std::move(form)) {
  auto check = [](double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("disaster probabilities must lie in [0, 1]");
  };
  std::visit(overloaded{
                 [&](const Table& t) {
                   for (double p : t.values) check(p);
                 },
                 [](const Harmonic& h) {
                   if (!(h.c >= 0.0) || !std::isfinite(h.c))
                     throw DomainError("harmonic disaster coefficient must be >= 0");
                 },
                 [&](const Constant& c) { check(c.c); },
             },
             form_);
}

double DisasterSchedule::operator()(std::uint64_t k) const noexcept {
  return std::visit(overloaded{
                        [k](const Table& t) {
                          return k >= 1 && k <= t.values.size() ? t.values[k - 1] : 0.0;
                        },
                        [k](const Harmonic& h) {
                          if (k < std::max<std::uint64_t>(h.start, 1)) return 0.0;
                          return std::min(1.0, h.c / static_cast<double>(k));
                        },
                        [](const Constant& c) { return c.c; },
                    },
                    form_);
}

bool DisasterSchedule::sum_diverges() const noexcept {
  return std::visit(overloaded{
                        [](const Table&) { return false; },
                        [](const Harmonic& h) { return h.c > 0.0; },
                        [](const Constant& c) { return c.c > 0.0; },
                    },
                    form_);
}

void validate_policy(const ControlPolicy& policy) {
  if (const auto* t = std::get_if<policies::Truncation>(&policy)) {
    if (t->g(0) < 1) throw DomainError("truncation requires g(0) >= 1");
  }
  if (const auto* a = std::get_if<policies::Absorbing>(&policy)) {
    if (const auto* t = std::get_if<rules::TruncationAsAbsorption>(&a->rule)) {
      if (t->g(0) < 1) throw DomainError("truncation requires g(0) >= 1");
    }
    if (const auto* c = std::get_if<rules::Custom>(&a->rule)) {
      if (!c->absorbed) throw DomainError("custom absorbing rule is empty");
    }
  }
}

bool zero_is_absorbing(const ControlPolicy* policy) {
  if (policy == nullptr) return true;
  if (const auto* p = std::get_if<policies::Phi>(policy)) return p->phi(0) == 0;
  return true;
}

std::string describe(const ControlPolicy& policy) {
  return std::visit(
      overloaded{
          [](const policies::Truncation& t) { return "truncation g=" + t.g.describe(); },
          [](const policies::Absorbing& a) {
            return std::visit(
                overloaded{
                    [](const rules::TruncationAsAbsorption& t) {
                      return "absorbing truncation g=" + t.g.describe();
                    },
                    [](const rules::Disaster& d) {
                      return std::string(d.delta.sum_diverges() ? "absorbing disaster (divergent schedule)"
                                                                : "absorbing disaster (summable schedule)");
                    },
                    [](const rules::LowerBoundary& l) { return "absorbing lower boundary b=" + l.b.describe(); },
                    [](const rules::Custom& c) { return "absorbing " + c.label; },
                },
                a.rule);
          },
          [](const policies::Phi& p) { return "phi=" + p.phi.describe(); },
      },
      policy);
}

std::uint64_t apply_truncation(std::uint64_t offspring, std::size_t generation,
                               const IntegerFunction& g) {
  if (generation < 1) throw DomainError("truncation applies from generation 1");
  return std::min(g(generation), offspring);
}

std::uint64_t apply_absorption(std::uint64_t offspring, std::size_t generation,
                               const AbsorbingRule& rule, History history, RandomStream& rng) {
  if (generation < 1) throw DomainError("absorption applies from generation 1");
  const std::uint64_t absorbed = std::visit(
      overloaded{
          [&](const rules::TruncationAsAbsorption& t) -> std::uint64_t {
            const std::uint64_t cap = t.g(generation);
            return offspring > cap ? offspring - cap : 0;
          },
          [&](const rules::Disaster& d) -> std::uint64_t {
            // One draw per generation regardless of the outcome.
            const double u = rng.uniform();
            return u < d.delta(generation) ? offspring : 0;
          },
          [&](const rules::LowerBoundary& l) -> std::uint64_t {
            return offspring < l.b(generation) ? offspring : 0;
          },
          [&](const rules::Custom& c) -> std::uint64_t {
            const std::uint64_t a = c.absorbed(offspring, generation, history, rng);
            if (a > offspring)
              throw InvalidRule(c.label + " absorbed " + std::to_string(a) + " of " +
                                std::to_string(offspring) + " offspring");
            return a;
          },
      },
      rule);
  return offspring - absorbed;
}

std::uint64_t apply_phi(std::uint64_t state, const IntegerFunction& phi, const OffspringLaw& law,
                        RandomStream& rng, const SamplerOptions& options) {
  return sample_offspring_total(law, phi(state), rng, options);
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Divergent:
      return "Divergent";
    case Verdict::Convergent:
      return "Convergent";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

namespace {

/// Exact verdict for symbolic g by comparison with p-series and geometric
/// series. Returns nullopt for forms without a proof path.
std::optional<Verdict> exact_verdict(double base, const IntegerFunction& g,
                                     std::optional<double>& exponent) {
  const double log_base = std::log(base);  // < 0
  return std::visit(
      overloaded{
          [](const IntegerFunction::Constant&) -> std::optional<Verdict> { return Verdict::Divergent; },
          [](const IntegerFunction::Table&) -> std::optional<Verdict> {
            // Eventually constant: terms stay at base^{last} > 0.
            return Verdict::Divergent;
          },
          [&](const IntegerFunction::Logarithmic& l) -> std::optional<Verdict> {
            // base^{g(n)} lies within a factor 1/base of (n+1)^{-alpha}.
            double alpha = -l.a * log_base / std::log(l.base);
            if (std::abs(alpha - 1.0) <= 1e-12) alpha = 1.0;
            exponent = alpha;
            return alpha <= 1.0 ? Verdict::Divergent : Verdict::Convergent;
          },
          [&](const IntegerFunction::Linear& l) -> std::optional<Verdict> {
            if (l.a > 0.0) return Verdict::Convergent;
            // a < 0 clamps to 0 eventually; a == 0 is constant.
            return Verdict::Divergent;
          },
          [](const IntegerFunction::Custom&) -> std::optional<Verdict> { return std::nullopt; },
      },
      g.form());
}

}  // namespace

CriterionVerdict classify_power_series(double base, const IntegerFunction& g, std::size_t n_max) {
  if (!(base > 0.0 && base < 1.0)) throw DomainError("series base must lie in (0, 1)");
  if (n_max < 100) throw DomainError("n_max must be >= 100");

  CriterionVerdict out;
  out.partial_sums.reserve(n_max);
  const double log_base = std::log(base);
  double acc = 0.0;
  std::vector<double> log_terms(n_max + 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double exponent = static_cast<double>(g(n));
    log_terms[n] = exponent * log_base;
    acc += std::exp(log_terms[n]);
    out.partial_sums.push_back(acc);
  }

  if (auto v = exact_verdict(base, g, out.fitted_decay_exponent)) {
    out.verdict = *v;
    out.exact = true;
    return out;
  }

  // Least squares of log term against log n over the top decade.
  const std::size_t lo = std::max<std::size_t>(1, n_max / 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t n = lo; n <= n_max; ++n) {
    const double x = std::log(static_cast<double>(n));
    const double y = log_terms[n];
    if (!std::isfinite(y)) continue;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  if (count < 2 || denom <= 0.0) return out;
  const double alpha = -(count * sxy - sx * sy) / denom;
  out.fitted_decay_exponent = alpha;
  if (alpha < 1.0 - kExponentSlack) {
    out.verdict = Verdict::Divergent;
  } else if (alpha > 1.0 + kExponentSlack) {
    out.verdict = Verdict::Convergent;
  }
  return out;
}

CriterionVerdict zubkov_criterion(double q, const IntegerFunction& g, std::size_t n_max) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
  return classify_power_series(q, g, n_max);
}

CriterionVerdict expectation_criterion(double p, double q, const IntegerFunction& g,
                                       std::size_t n_max) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
  if (!(p > 0.0 && p <= q)) throw DomainError("p must lie in (0, q]");
  return classify_power_series(p, g, n_max);
}

EnvelopeReport envelope_check(const BatchResult& batch, const IntegerFunction& g) {
  EnvelopeReport out;
  out.conditional_mean.resize(batch.horizon + 1);
  out.unconditional_mean.resize(batch.horizon + 1);
  for (std::size_t n = 0; n <= batch.horizon; ++n) {
    out.conditional_mean[n] = batch.mean_given_alive(n);
    out.unconditional_mean[n] = batch.mean(n);
    if (n == 0) continue;
    const double cap = static_cast<double>(g(n));
    if (batch.tallies[n].escaped > 0 || out.conditional_mean[n] > cap)
      out.conditional_violations.push_back(n);
    if (batch.tallies[n].escaped > 0 || out.unconditional_mean[n] > cap)
      out.unconditional_violations.push_back(n);
  }
  return out;
}

}  // namespace gwsim
