#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "fairslot/core.hpp"
#include "fairslot/errors.hpp"

namespace fairslot {

// Both k-unit mechanisms reduce to a one-parameter water-level problem:
//   floor_one_minus: a_i = max(0, 1 - t*w_i), sum_i a_i = k  (IPA, w = vhat^-ell)
//   cap_at_one:      a_i = min(1, t*w_i), sum_i a_i = k      (PA,  w = vhat^ell)
// The totals are piecewise linear in t with breakpoints at t = 1/w_i, so the
// level is solved exactly on the crossing segment. No iterative root finding.
enum class WaterDirection { floor_one_minus, cap_at_one };

struct WaterLevelResult {
  double level = 0.0;
  std::vector<double> allocation;
};

namespace detail {

struct Breakpoint {
  double t;
  double weight;
};

inline std::vector<Breakpoint> sorted_breakpoints(const std::vector<double>& w) {
  std::vector<Breakpoint> bp;
  bp.reserve(w.size());
  for (double wi : w) {
    if (wi > 0) bp.push_back({1.0 / wi, wi});
  }
  std::sort(bp.begin(), bp.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.t < b.t; });
  return bp;
}

// Suffix weight sums over breakpoints sorted by t; index m holds the sum of
// weights at positions >= m. Computed fresh so segment slopes do not carry
// subtraction drift.
inline std::vector<double> suffix_weight_sums(const std::vector<Breakpoint>& bp) {
  std::vector<double> s(bp.size() + 1, 0.0);
  for (size_t m = bp.size(); m-- > 0;) s[m] = s[m + 1] + bp[m].weight;
  return s;
}

}  // namespace detail

// Solves for the minimal level meeting the target sum exactly (one linear
// solve on the crossing segment). Weights must be finite and non-negative;
// callers strip forced entries (zero allocations, infinite weights) first.
inline WaterLevelResult water_level_solve(const std::vector<double>& weights, int units,
                                          WaterDirection direction) {
  const int n = static_cast<int>(weights.size());
  if (units < 0 || units > n) fail(Errc::infeasible, "units outside [0, n]");
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) fail(Errc::infeasible, "weights must be finite and >= 0");
  }

  const auto bp = detail::sorted_breakpoints(weights);
  const auto suffix = detail::suffix_weight_sums(bp);
  const int positives = static_cast<int>(bp.size());
  const int zeros = n - positives;

  WaterLevelResult out;
  out.allocation.assign(n, 0.0);

  if (direction == WaterDirection::cap_at_one) {
    // total(t) = #capped + t * (uncapped weight sum); increasing, 0 to #positives.
    if (units > positives) fail(Errc::infeasible, "target exceeds number of positive weights");
    double t = 0.0;
    if (units > 0) {
      t = bp.back().t;
      for (size_t m = 0; m < bp.size();) {
        const double t_seg = (units - static_cast<double>(m)) / suffix[m];
        if (t_seg <= bp[m].t) {
          t = std::max(t_seg, m == 0 ? 0.0 : bp[m - 1].t);
          break;
        }
        size_t g = m;
        while (g < bp.size() && bp[g].t == bp[m].t) ++g;  // tied breakpoints cross together
        m = g;
      }
    }
    out.level = t;
    for (int i = 0; i < n; ++i) out.allocation[i] = std::min(1.0, t * weights[i]);
    return out;
  }

  // floor_one_minus: total(t) = sum max(0, 1 - t*w_i); decreasing, n to #zeros.
  if (units < zeros) fail(Errc::infeasible, "zero weights already pin more than the target");
  double t = 0.0;
  if (units < n) {
    t = bp.back().t;
    for (size_t m = 0; m < bp.size();) {
      const double t_seg = (static_cast<double>(n - m) - units) / suffix[m];
      if (t_seg <= bp[m].t) {
        t = std::max(t_seg, m == 0 ? 0.0 : bp[m - 1].t);
        break;
      }
      size_t g = m;
      while (g < bp.size() && bp[g].t == bp[m].t) ++g;
      m = g;
    }
  }
  out.level = t;
  for (int i = 0; i < n; ++i) out.allocation[i] = std::max(0.0, 1.0 - t * weights[i]);
  return out;
}

// Output of a k-unit mechanism. `water_level` is absent on the degenerate
// branches (k = 0, all-zero effective values, fewer positive values than
// units) where no parametric solve takes place.
struct KUnitAllocation {
  std::vector<double> a;
  std::optional<double> water_level;
};

namespace detail {

// k units with fewer than k positive effective values: every positive
// advertiser saturates at 1 and the residual spreads uniformly over the
// zero-valued ones. The printed algorithms leave this case open (their
// closed forms would exceed 1); the uniform split is the only symmetric
// completion that keeps entries in [0,1] and stays monotone in k.
inline KUnitAllocation saturated_completion(const std::vector<double>& vhat, int k, int positives) {
  KUnitAllocation out;
  const int n = static_cast<int>(vhat.size());
  const double residual = static_cast<double>(k - positives) / (n - positives);
  out.a.resize(n);
  for (int i = 0; i < n; ++i) out.a[i] = vhat[i] > 0 ? 1.0 : residual;
  return out;
}

inline KUnitAllocation uniform_allocation(int n, int k) {
  KUnitAllocation out;
  out.a.assign(n, static_cast<double>(k) / n);
  return out;
}

inline int count_positive(const std::vector<double>& v) {
  int c = 0;
  for (double x : v) c += x > 0 ? 1 : 0;
  return c;
}

}  // namespace detail

// k-unit inverse proportional allocation: starts every advertiser at 1 and
// removes mass proportional to vhat^{-ell} until the total reaches k.
// Implemented as the sorted elimination loop with the closed form
//   a_i = 1 - (s - k) * g(vhat_i) / sum_{t<=s} g(vhat_t),  g(x) = x^{-ell},
// eliminating on equality of the loop guard. Zero-valued advertisers receive
// 0 (g(0) = inf) unless fewer than k positive values remain.
inline KUnitAllocation kunit_ipa(const EffectiveValues& ev, int k, double ell) {
  const auto& vhat = ev.vhat;
  const int n = static_cast<int>(vhat.size());
  if (k < 0 || k > n) fail(Errc::k_exceeds_n);

  KUnitAllocation out;
  if (k == 0) {
    out.a.assign(n, 0.0);
    return out;
  }
  const int positives = detail::count_positive(vhat);
  if (positives == 0) return detail::uniform_allocation(n, k);
  if (positives < k) return detail::saturated_completion(vhat, k, positives);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vhat[a] > vhat[b]; });

  // The mechanism is scale-free; normalizing by the top value keeps the
  // power weights >= 1 and out of overflow range.
  const double top = vhat[order[0]];
  std::vector<double> g(n, 0.0);
  std::vector<double> prefix(n + 1, 0.0);
  for (int m = 0; m < positives; ++m) {
    g[m] = std::pow(vhat[order[m]] / top, -ell);
    prefix[m + 1] = prefix[m] + g[m];
  }

  int s = positives;
  while (s > 0 && (s - k) * g[s - 1] >= prefix[s]) --s;

  const double level = (s - k) / prefix[s];
  out.a.assign(n, 0.0);
  for (int m = 0; m < s; ++m) out.a[order[m]] = level == 0.0 ? 1.0 : 1.0 - level * g[m];
  out.water_level = level * std::pow(top, -ell);  // undo the normalization of g
  return out;
}

// k-unit proportional allocation: a_i = min(1, T * vhat_i^{ell}) at the
// unique level T with total k. Capping at 1 and re-dividing the excess
// proportionally is exactly this parametric form.
inline KUnitAllocation kunit_pa(const EffectiveValues& ev, int k, double ell) {
  const auto& vhat = ev.vhat;
  const int n = static_cast<int>(vhat.size());
  if (k < 0 || k > n) fail(Errc::k_exceeds_n);

  KUnitAllocation out;
  if (k == 0) {
    out.a.assign(n, 0.0);
    return out;
  }
  const int positives = detail::count_positive(vhat);
  if (positives == 0) return detail::uniform_allocation(n, k);
  if (positives < k) return detail::saturated_completion(vhat, k, positives);

  double top = 0.0;
  for (double v : vhat) top = std::max(top, v);
  std::vector<double> weights(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (vhat[i] > 0) weights[i] = std::pow(vhat[i] / top, ell);
  }
  auto solved = water_level_solve(weights, k, WaterDirection::cap_at_one);
  out.a = std::move(solved.allocation);
  out.water_level = solved.level * std::pow(top, -ell);
  return out;
}

inline KUnitAllocation kunit_allocate(const EffectiveValues& ev, int k, const MechanismConfig& cfg) {
  return cfg.family == Family::ipa ? kunit_ipa(ev, k, cfg.ell) : kunit_pa(ev, k, cfg.ell);
}

}  // namespace fairslot
