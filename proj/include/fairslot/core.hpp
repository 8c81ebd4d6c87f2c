#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fairslot/errors.hpp"

namespace fairslot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One auction: per-click bids v_i, ad-specific CTRs alpha_i, slot CTRs
// beta_1 >= ... >= beta_k, and the slot count k. Immutable after validation.
struct AuctionInstance {
  std::vector<double> values;  // v_i >= 0
  std::vector<double> alpha;   // alpha_i > 0
  std::vector<double> beta;    // 1 >= beta_1 >= ... >= beta_k >= 0
  int k = 0;

  int n() const { return static_cast<int>(values.size()); }
};

struct EffectiveValues {
  std::vector<double> vhat;  // v_i * alpha_i

  int n() const { return static_cast<int>(vhat.size()); }
};

enum class Family { ipa, pa };

inline const char* family_name(Family f) { return f == Family::ipa ? "ipa" : "pa"; }

// Mechanism choice plus its smoothing exponent. IPA keeps unallocated mass
// proportional to vhat^{-ell}; PA allocates proportional to vhat^{ell}.
struct MechanismConfig {
  Family family = Family::ipa;
  double ell = 1.0;
};

inline MechanismConfig validate_config(MechanismConfig cfg) {
  if (!(cfg.ell > 0) || !std::isfinite(cfg.ell))
    fail(Errc::invalid_config, "ell must be a positive finite real");
  return cfg;
}

struct StabilityBound {
  double lambda = 1.0;  // in [1, inf]
  double value = 0.0;   // f_ell(lambda) in [0, 1]
};

inline StabilityBound stability_bound_at(double lambda, double ell);

// Checks the model constraints and returns the instance unchanged.
// k = 0 is accepted; it yields an empty allocation matrix downstream.
inline AuctionInstance validate_instance(AuctionInstance raw) {
  if (raw.k < 0) fail(Errc::dimension_mismatch, "k must be non-negative");
  if (raw.alpha.size() != raw.values.size())
    fail(Errc::dimension_mismatch, "values and alpha must have the same length");
  if (raw.beta.size() != static_cast<size_t>(raw.k))
    fail(Errc::dimension_mismatch, "beta must have exactly k entries");
  for (double v : raw.values) {
    if (!(v >= 0) || std::isnan(v)) fail(Errc::negative_value);
  }
  for (double a : raw.alpha) {
    if (!(a > 0) || !std::isfinite(a)) fail(Errc::non_positive_alpha);
  }
  for (size_t j = 0; j + 1 < raw.beta.size(); ++j) {
    if (raw.beta[j] < raw.beta[j + 1]) fail(Errc::beta_not_sorted);
  }
  for (double b : raw.beta) {
    if (!(b >= 0) || !(b <= 1)) fail(Errc::beta_out_of_range);
  }
  if (raw.n() < raw.k) fail(Errc::too_few_advertisers);
  return raw;
}

inline EffectiveValues effective_values(const AuctionInstance& inst) {
  EffectiveValues ev;
  ev.vhat.resize(inst.values.size());
  for (size_t i = 0; i < inst.values.size(); ++i) ev.vhat[i] = inst.values[i] * inst.alpha[i];
  return ev;
}

/// f_ell(lambda) = 1 - lambda^{-2 ell}; the stability-constraint family all
/// guarantees in this library are stated against.
inline double stability_bound(double lambda, double ell) {
  if (!(lambda >= 1)) fail(Errc::lambda_below_one);
  if (std::isinf(lambda)) return 1.0;
  return 1.0 - std::pow(lambda, -2.0 * ell);
}

inline StabilityBound stability_bound_at(double lambda, double ell) {
  return {lambda, stability_bound(lambda, ell)};
}

// Multiplicative distance between two non-negative vectors: the largest
// component-wise ratio in either direction. A zero paired with a positive
// entry gives infinity; 0/0 counts as ratio 1 so identical zero entries do
// not inflate the distance.
inline double lambda_of(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(Errc::length_mismatch);
  double lam = 1.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const bool xz = x[i] == 0.0, yz = y[i] == 0.0;
    if (xz && yz) continue;
    if (xz || yz) return kInf;
    const double r = x[i] > y[i] ? x[i] / y[i] : y[i] / x[i];
    if (r > lam) lam = r;
  }
  return lam;
}

}  // namespace fairslot
