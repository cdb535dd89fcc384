#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gwsim {

/// Estimates of P(E_{t_k}) and P(E_{t_k} | not E_{t_{k-1}}) for the nested
/// extinction events E_n = {Z_n = 0}, computed on one coupled trial set.
struct MonotoneEventEstimate {
  std::vector<std::size_t> schedule;
  std::vector<double> p_marginal;
  /// nullopt where nobody was alive at t_{k-1} (empty conditioning).
  std::vector<std::optional<double>> p_conditional;
  /// Partial sums over the defined conditional terms.
  std::vector<double> partial_sums;
  std::size_t trials = 0;

  /// Raw counts behind the ratios: alive_before[k] trials alive at t_{k-1}
  /// (t_0 = 0), newly_extinct[k] of them extinct by t_k.
  std::vector<std::size_t> alive_before;
  std::vector<std::size_t> newly_extinct;

  bool empty_conditioning() const;
};

/// `extinction_generation[i]` is the first generation with Z_n = 0 in
/// trial i, or nullopt when the trial survives the horizon. Throws
/// DomainError for schedules that are not strictly increasing, start below
/// 1, or run past the horizon.
MonotoneEventEstimate estimate_conditional_series(
    std::span<const std::optional<std::size_t>> extinction_generation, std::size_t horizon,
    std::span<const std::size_t> schedule);

/// Checks 1 - p_marginal[K] == prod_k (1 - p_conditional[k]) on the stored
/// counts (exact integer telescoping) and in floating point to 1e-12.
/// Terms with empty conditioning may only follow total extinction; the
/// identity is then checked up to the last defined term.
bool chain_identity_holds(const MonotoneEventEstimate& estimate);

enum class ScheduleFamily { Linear, PowersOfTwo, Squares };
const char* to_string(ScheduleFamily f) noexcept;

/// t_k = k, 2^k or k^2 for k = 1..max_points, cut at the horizon.
std::vector<std::size_t> make_schedule(ScheduleFamily family, std::size_t max_points,
                                       std::size_t horizon);

struct ScheduleChoice {
  ScheduleFamily family = ScheduleFamily::Linear;
  std::vector<std::size_t> schedule;
  double partial_sum = 0.0;
};

/// Picks the family with the largest conditional partial sum; ties go to
/// t_k = k.
ScheduleChoice schedule_search(std::span<const std::optional<std::size_t>> extinction_generation,
                               std::size_t horizon, std::size_t max_points);

}  // namespace gwsim
