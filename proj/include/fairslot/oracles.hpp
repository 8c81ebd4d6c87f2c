#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fairslot/core.hpp"
#include "fairslot/errors.hpp"
#include "fairslot/feasibility.hpp"
#include "fairslot/kunit.hpp"
#include "fairslot/position.hpp"

// Brute-force reference implementations used to validate the main modules.
// Nothing here may call into the breakpoint water-level solver or the
// payment curve machinery; agreement between the two code paths is the test.

namespace fairslot::oracles {

struct OracleConfig {
  double bisection_tol = 1e-12;
  int payment_grid = 100000;
  int fuzz_trials = 10000;
  uint64_t seed = 0;
};

namespace detail {

inline double floor_total(const std::vector<double>& w, double t) {
  double s = 0.0;
  for (double wi : w) {
    if (std::isinf(wi)) continue;  // infinite weight: pinned to zero allocation
    s += t == 0.0 ? 1.0 : std::max(0.0, 1.0 - t * wi);
  }
  return s;
}

inline double cap_total(const std::vector<double>& w, double t) {
  double s = 0.0;
  for (double wi : w) {
    if (wi <= 0) continue;
    s += std::isinf(wi) ? 1.0 : std::min(1.0, t * wi);
  }
  return s;
}

}  // namespace detail

// Plain bisection on the monotone total-allocation function.
inline std::vector<double> bisect_water_level(const std::vector<double>& weights, int units,
                                              WaterDirection direction, double tol = 1e-12) {
  const int n = static_cast<int>(weights.size());
  if (units < 0 || units > n) fail(Errc::infeasible);
  const bool cap = direction == WaterDirection::cap_at_one;
  if (cap && units == 0) return std::vector<double>(n, 0.0);
  if (!cap && units == n) {
    std::vector<double> all(n, 1.0);
    for (int i = 0; i < n; ++i) {
      if (std::isinf(weights[i])) all[i] = 0.0;
    }
    return all;
  }
  auto total = [&](double t) {
    return cap ? detail::cap_total(weights, t) : detail::floor_total(weights, t);
  };

  double lo = 0.0, hi = 1.0;
  const double target = static_cast<double>(units);
  auto overshoots = [&](double t) { return cap ? total(t) >= target : total(t) <= target; };
  int guard = 0;
  while (!overshoots(hi)) {
    hi *= 2.0;
    if (++guard > 1100) fail(Errc::infeasible, "no bracketing level found");
  }
  for (int it = 0; it < 500 && std::abs(total(0.5 * (lo + hi)) - target) >= tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (overshoots(mid))
      hi = mid;
    else
      lo = mid;
  }
  const double t = 0.5 * (lo + hi);
  std::vector<double> alloc(n);
  for (int i = 0; i < n; ++i) {
    if (cap) {
      alloc[i] = weights[i] <= 0 ? 0.0 : (std::isinf(weights[i]) ? 1.0 : std::min(1.0, t * weights[i]));
    } else {
      alloc[i] = std::isinf(weights[i]) ? 0.0 : std::max(0.0, 1.0 - t * weights[i]);
    }
  }
  return alloc;
}

// k-unit allocations recomputed through bisection, including the degenerate
// branches, for direct comparison against the mechanism path.
inline std::vector<double> bisect_kunit(const EffectiveValues& ev, int k, double ell,
                                        Family family, double tol = 1e-12) {
  const int n = ev.n();
  if (k < 0 || k > n) fail(Errc::k_exceeds_n);
  if (k == 0) return std::vector<double>(n, 0.0);
  int positives = 0;
  for (double v : ev.vhat) positives += v > 0 ? 1 : 0;
  if (positives == 0) return std::vector<double>(n, static_cast<double>(k) / n);
  if (positives < k) {
    std::vector<double> a(n, static_cast<double>(k - positives) / (n - positives));
    for (int i = 0; i < n; ++i) {
      if (ev.vhat[i] > 0) a[i] = 1.0;
    }
    return a;
  }
  double top = 0.0;
  for (double v : ev.vhat) top = std::max(top, v);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    if (family == Family::ipa) {
      w[i] = ev.vhat[i] > 0 ? std::pow(ev.vhat[i] / top, -ell) : kInf;
    } else {
      w[i] = ev.vhat[i] > 0 ? std::pow(ev.vhat[i] / top, ell) : 0.0;
    }
  }
  return bisect_water_level(
      w, k, family == Family::ipa ? WaterDirection::floor_one_minus : WaterDirection::cap_at_one,
      tol);
}

// Expected clicks x_i(z) obtained by rerunning the whole mechanism at z,
// then trapezoid integration on a uniform grid for the payment identity.
inline double mechanism_clicks(const AuctionInstance& inst, int advertiser, double bid,
                               const MechanismConfig& cfg) {
  AuctionInstance probe = inst;
  probe.values[advertiser] = bid;
  const AllocationMatrix m = generalized_allocation(probe, cfg);
  double x = 0.0;
  for (int j = 1; j <= inst.k; ++j) {
    const double w = inst.beta[j - 1] - (j < inst.k ? inst.beta[j] : 0.0);
    x += w * m.cumulative[j][advertiser];
  }
  return x * inst.alpha[advertiser];
}

inline double numeric_payment(const AuctionInstance& inst, int advertiser,
                              const MechanismConfig& cfg, int grid = 100000) {
  const double v = inst.values.at(advertiser);
  if (v == 0) return 0.0;
  // Quadratically graded grid: competitor values can sit orders of magnitude
  // below v, and the click curve does all its bending there.
  double integral = 0.0;
  double prev_z = 0.0;
  double prev = mechanism_clicks(inst, advertiser, 0.0, cfg);
  for (int g = 1; g <= grid; ++g) {
    const double u = static_cast<double>(g) / grid;
    const double z = v * u * u;
    const double cur = mechanism_clicks(inst, advertiser, z, cfg);
    integral += 0.5 * (prev + cur) * (z - prev_z);
    prev_z = z;
    prev = cur;
  }
  return v * prev - integral;  // prev now holds x_i(v)
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(uint64_t seed) : engine(seed) {}
  double uniform01() { return (engine() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform01() * (hi - lo + 1)) % (hi - lo + 1);
  }
};

// Values log-uniform on [1e-2, 1e2] and alpha on [1e-1, 10]: wide enough to
// drive both the IPA elimination loop and the PA cap.
inline AuctionInstance random_instance(Rng& rng, int n, int k) {
  AuctionInstance inst;
  inst.k = k;
  inst.values.resize(n);
  inst.alpha.resize(n);
  for (int i = 0; i < n; ++i) {
    inst.values[i] = rng.log_uniform(1e-2, 1e2);
    inst.alpha[i] = rng.log_uniform(1e-1, 10.0);
  }
  inst.beta.resize(k);
  for (int j = 0; j < k; ++j) inst.beta[j] = rng.uniform01();
  std::sort(inst.beta.rbegin(), inst.beta.rend());
  return validate_instance(std::move(inst));
}

enum class PairStrategy { random, single_coordinate };

// Instance pairs at effective-value distance at most lambda_max (sharing
// alpha, beta and k). The single-coordinate strategy realizes the worst case
// from the k-unit stability analysis: one coordinate shrunk by lambda^2,
// rescaled by lambda so the pair sits at distance exactly lambda (the
// mechanisms are scale-free, so the rescale changes nothing downstream).
inline std::pair<AuctionInstance, AuctionInstance> pair_generator(uint64_t seed, int n, int k,
                                                                  double lambda_max,
                                                                  PairStrategy strategy) {
  if (!(lambda_max >= 1)) fail(Errc::lambda_below_one);
  Rng rng(seed);
  AuctionInstance a = random_instance(rng, n, k);
  AuctionInstance b = a;
  if (strategy == PairStrategy::single_coordinate) {
    if (lambda_max > 1) {
      const int coord = rng.uniform_int(0, n - 1);
      b.values[coord] /= lambda_max * lambda_max;
      for (double& v : b.values) v *= lambda_max;
    }
  } else {
    for (double& v : b.values) v *= rng.log_uniform(1.0 / lambda_max, lambda_max);
  }
  return {std::move(a), validate_instance(std::move(b))};
}

// Worst PA welfare ratio min_{c in [0,1]} c + (1-c) / (1 + (n-k) c^ell),
// by golden-section search; the reference where the closed-form bound's
// side condition fails.
inline double pa_worst_ratio(int n, int k, double ell, double tol = 1e-10) {
  if (n <= k) fail(Errc::bad_shape, "needs n > k");
  const double nk = static_cast<double>(n - k);
  auto ratio = [&](double c) { return c + (1.0 - c) / (1.0 + nk * std::pow(c, ell)); };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = ratio(x1), f2 = ratio(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = ratio(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = ratio(x2);
    }
  }
  return ratio(0.5 * (lo + hi));
}

}  // namespace fairslot::oracles
