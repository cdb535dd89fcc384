#include "gwsim/series.hpp"

#include <algorithm>
#include <cmath>

#include "gwsim/errors.hpp"

namespace gwsim {

bool MonotoneEventEstimate::empty_conditioning() const {
  return std::any_of(p_conditional.begin(), p_conditional.end(),
                     [](const auto& p) { return !p.has_value(); });
}

MonotoneEventEstimate estimate_conditional_series(
    std::span<const std::optional<std::size_t>> extinction_generation, std::size_t horizon,
    std::span<const std::size_t> schedule) {
  if (schedule.empty()) throw DomainError("schedule is empty");
  if (schedule.front() < 1) throw DomainError("schedule must start at generation >= 1");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (schedule[k] <= schedule[k - 1]) throw DomainError("schedule must be strictly increasing");
  if (schedule.back() > horizon) throw DomainError("schedule runs past the horizon");

  // extinct_by[n] = trials extinct at or before generation n.
  std::vector<std::size_t> extinct_by(horizon + 1, 0);
  for (const auto& g : extinction_generation)
    if (g && *g <= horizon) ++extinct_by[*g];
  for (std::size_t n = 1; n <= horizon; ++n) extinct_by[n] += extinct_by[n - 1];

  MonotoneEventEstimate out;
  out.trials = extinction_generation.size();
  out.schedule.assign(schedule.begin(), schedule.end());
  const double trials = static_cast<double>(out.trials);
  double sum = 0.0;
  std::size_t previous = 0;  // t_0
  for (std::size_t t : schedule) {
    const std::size_t dead_before = extinct_by[previous];
    const std::size_t alive = out.trials - dead_before;
    const std::size_t newly = extinct_by[t] - dead_before;
    out.alive_before.push_back(alive);
    out.newly_extinct.push_back(newly);
    out.p_marginal.push_back(out.trials ? static_cast<double>(extinct_by[t]) / trials : 0.0);
    if (alive == 0) {
      out.p_conditional.push_back(std::nullopt);
    } else {
      const double p = static_cast<double>(newly) / static_cast<double>(alive);
      out.p_conditional.push_back(p);
      sum += p;
    }
    out.partial_sums.push_back(sum);
    previous = t;
  }
  return out;
}

bool chain_identity_holds(const MonotoneEventEstimate& e) {
  if (e.p_marginal.empty() || !e.p_conditional.front()) return false;
  // Terms with empty conditioning only follow total extinction; the identity
  // is checked up to the last defined term and later marginals must be 1.
  std::size_t defined = 0;
  while (defined < e.p_conditional.size() && e.p_conditional[defined]) ++defined;
  for (std::size_t k = defined; k < e.p_conditional.size(); ++k)
    if (e.p_conditional[k] || e.alive_before[k] != 0 || e.p_marginal[k] != 1.0) return false;

  // Survivors after term k must be exactly the conditioning set of term k+1.
  for (std::size_t k = 0; k + 1 < defined; ++k)
    if (e.alive_before[k] - e.newly_extinct[k] != e.alive_before[k + 1]) return false;
  if (e.alive_before.front() > e.trials) return false;
  const std::size_t last = defined - 1;
  const std::size_t survivors = e.alive_before[last] - e.newly_extinct[last];
  const std::size_t extinct = e.trials - survivors;
  if (static_cast<double>(extinct) / static_cast<double>(e.trials) != e.p_marginal[last]) return false;

  double product = 1.0;
  for (std::size_t k = 0; k < defined; ++k) product *= 1.0 - *e.p_conditional[k];
  const double lhs = 1.0 - e.p_marginal[last];
  return std::abs(lhs - product) <= 1e-12 * std::max(1.0, std::abs(lhs)) + 1e-15;
}

const char* to_string(ScheduleFamily f) noexcept {
  switch (f) {
    case ScheduleFamily::Linear:
      return "k";
    case ScheduleFamily::PowersOfTwo:
      return "2^k";
    case ScheduleFamily::Squares:
      return "k^2";
  }
  return "?";
}

std::vector<std::size_t> make_schedule(ScheduleFamily family, std::size_t max_points,
                                       std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= max_points; ++k) {
    std::size_t t = 0;
    switch (family) {
      case ScheduleFamily::Linear:
        t = k;
        break;
      case ScheduleFamily::PowersOfTwo:
        t = k < 63 ? std::size_t{1} << k : horizon + 1;
        break;
      case ScheduleFamily::Squares:
        t = k * k;
        break;
    }
    if (t > horizon) break;
    out.push_back(t);
  }
  return out;
}

ScheduleChoice schedule_search(std::span<const std::optional<std::size_t>> extinction_generation,
                               std::size_t horizon, std::size_t max_points) {
  if (max_points < 2) throw DomainError("max_points must be >= 2");
  ScheduleChoice best;
  bool have = false;
  for (auto family : {ScheduleFamily::Linear, ScheduleFamily::PowersOfTwo, ScheduleFamily::Squares}) {
    auto schedule = make_schedule(family, max_points, horizon);
    if (schedule.empty()) continue;
    const auto est = estimate_conditional_series(extinction_generation, horizon, schedule);
    const double sum = est.partial_sums.back();
    if (!have || sum > best.partial_sum) {
      best = {family, std::move(schedule), sum};
      have = true;
    }
  }
  if (!have) throw DomainError("horizon too short for any schedule");
  return best;
}

}  // namespace gwsim
