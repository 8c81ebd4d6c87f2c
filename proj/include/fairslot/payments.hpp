#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairslot/core.hpp"
#include "fairslot/errors.hpp"
#include "fairslot/position.hpp"

namespace fairslot {

// One piece of an allocation curve a^{(j)}_i(v) on [v_lo, v_hi).
//   zero:     a = 0 (below the participation threshold, IPA)
//   one:      a = 1 (above the cap threshold, PA)
//   rational: IPA  a(v) = 1 - y * g/(g + x) with g = (alpha v)^{-ell}
//             PA   a(v) = y * g/(g + x)     with g = (alpha v)^{ell}
// x is the weight mass of the unsaturated competitors on the segment and
// y the unit target left for them plus the advertiser; x = 0 degrades to a
// constant piece in both families.
enum class PieceForm { zero, one, rational };

struct CurvePiece {
  double v_lo = 0.0;
  double v_hi = kInf;
  PieceForm form = PieceForm::zero;
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

inline double eval_piece(const CurvePiece& p, double alpha, double ell, Family family, double v) {
  switch (p.form) {
    case PieceForm::zero: return 0.0;
    case PieceForm::one: return 1.0;
    case PieceForm::rational: break;
  }
  if (family == Family::ipa) {
    // 1 - y/(1 + x (alpha v)^ell): stable at both ends of the v range.
    if (p.x == 0.0) return 1.0 - p.y;
    if (v == 0.0) return 1.0 - p.y;
    return 1.0 - p.y / (1.0 + p.x * std::pow(alpha * v, ell));
  }
  if (v == 0.0) return 0.0;
  if (p.x == 0.0) return p.y;
  return p.y / (1.0 + p.x * std::pow(alpha * v, -ell));
}

}  // namespace detail

// Piecewise-rational form of v_i -> a^{(j)}_i(v_i), everything else fixed.
struct AllocationCurve {
  std::vector<CurvePiece> pieces;  // partition [0, inf), ascending
  int advertiser = 0;
  int slots = 0;  // the unit count j the curve was built for
  double alpha = 1.0;
  double ell = 1.0;
  Family family = Family::ipa;

  double eval(double v) const {
    if (v < 0) fail(Errc::negative_value_query);
    size_t lo = 0, hi = pieces.size();
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (pieces[mid].v_lo <= v)
        lo = mid;
      else
        hi = mid;
    }
    return detail::eval_piece(pieces[lo], alpha, ell, family, v);
  }
};

namespace detail {

struct Segment {
  double t_lo, t_hi;  // water-level range
  double x, y;        // slope of the competitors' total; remaining unit target
};

// Enumerates the linear-in-t segments of sum_{i' != i} min(1, t * w_{i'}):
// breakpoints at t = 1/w, grouped when tied. `base_saturated` counts
// competitors saturated from t = 0 on (zero-valued ones under IPA).
inline std::vector<Segment> competitor_segments(std::vector<double> breakpoints,
                                                int base_saturated, double target) {
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> suffix(breakpoints.size() + 1, 0.0);
  for (size_t m = breakpoints.size(); m-- > 0;) suffix[m] = suffix[m + 1] + 1.0 / breakpoints[m];

  std::vector<Segment> segs;
  double t_prev = 0.0;
  size_t idx = 0;
  int saturated = base_saturated;
  while (true) {
    const double t_hi = idx < breakpoints.size() ? breakpoints[idx] : kInf;
    if (t_prev < t_hi) segs.push_back({t_prev, t_hi, suffix[idx], target - saturated});
    if (idx >= breakpoints.size()) break;
    t_prev = breakpoints[idx];
    while (idx < breakpoints.size() && breakpoints[idx] == t_prev) {
      ++saturated;
      ++idx;
    }
  }
  return segs;
}

inline void stitch_pieces(AllocationCurve& curve, std::vector<CurvePiece> pieces) {
  std::sort(pieces.begin(), pieces.end(),
            [](const CurvePiece& a, const CurvePiece& b) { return a.v_lo < b.v_lo; });
  if (pieces.empty()) throw std::logic_error("allocation curve came out empty");
  if (pieces.front().v_lo > 0) {
    CurvePiece z;
    z.v_lo = 0.0;
    z.v_hi = pieces.front().v_lo;
    pieces.insert(pieces.begin(), z);
  }
  for (size_t p = 0; p + 1 < pieces.size(); ++p) {
    const double border = pieces[p + 1].v_lo;
    const double left = eval_piece(pieces[p], curve.alpha, curve.ell, curve.family, border);
    const double right = eval_piece(pieces[p + 1], curve.alpha, curve.ell, curve.family, border);
    if (std::abs(left - right) > 1e-9)
      throw std::logic_error("allocation curve discontinuous at a piece border");
    pieces[p].v_hi = border;
  }
  if (std::isfinite(pieces.back().v_hi)) {
    // Only the PA cap ends at a finite value; extend with the saturated piece.
    const double border = pieces.back().v_hi;
    const double val = eval_piece(pieces.back(), curve.alpha, curve.ell, curve.family, border);
    if (std::abs(val - 1.0) > 1e-9)
      throw std::logic_error("allocation curve ends below 1 at a finite bid");
    CurvePiece one;
    one.form = PieceForm::one;
    one.v_lo = border;
    pieces.push_back(one);
  }
  curve.pieces = std::move(pieces);
}

}  // namespace detail

// Builds a^{(j)}_i as a function of advertiser i's own bid by solving the
// water-level equation symbolically on each competitor segment: with
// competitor total c + x*t, the level satisfies t*(g + x) = y for
// y = target - c, giving the rational piece; the t-interval maps to a bid
// interval through g. At most n pieces result.
inline AllocationCurve allocation_curve(const AuctionInstance& inst, int advertiser, int slots,
                                        double ell, Family family) {
  if (slots < 1 || slots > inst.k) fail(Errc::slot_out_of_range);
  if (advertiser < 0 || advertiser >= inst.n()) fail(Errc::dimension_mismatch, "advertiser index");

  const int n = inst.n();
  AllocationCurve curve;
  curve.advertiser = advertiser;
  curve.slots = slots;
  curve.alpha = inst.alpha[advertiser];
  curve.ell = ell;
  curve.family = family;

  std::vector<double> competitor_vhat;
  competitor_vhat.reserve(n - 1);
  int competitor_zeros = 0;
  for (int t = 0; t < n; ++t) {
    if (t == advertiser) continue;
    const double vh = inst.values[t] * inst.alpha[t];
    competitor_vhat.push_back(vh);
    competitor_zeros += vh == 0 ? 1 : 0;
  }
  const int competitor_pos = static_cast<int>(competitor_vhat.size()) - competitor_zeros;

  std::vector<CurvePiece> pieces;

  if (family == Family::ipa) {
    if (slots >= 1 + competitor_pos) {
      // Too few positive competitors to fill the units without advertiser i:
      // i is fully allocated at every positive bid.
      CurvePiece p;
      p.form = PieceForm::rational;  // x = y = 0 evaluates to the constant 1
      curve.pieces = {p};
      return curve;
    }
    std::vector<double> breakpoints;  // t = vhat'^ell where a competitor's allocation hits 0
    for (double vh : competitor_vhat) {
      if (vh > 0) breakpoints.push_back(std::pow(vh, ell));
    }
    const double target = static_cast<double>(n - slots);
    for (const auto& s :
         detail::competitor_segments(std::move(breakpoints), competitor_zeros, target)) {
      if (s.y <= 0) continue;
      CurvePiece p;
      p.form = PieceForm::rational;
      p.x = s.x;
      p.y = s.y;
      auto v_at = [&](double t) {
        const double g = s.y / t - s.x;
        return g <= 0 ? kInf : std::pow(g, -1.0 / ell) / curve.alpha;
      };
      if (s.x > 0) {
        const double tl = std::max(s.t_lo, (s.y - 1.0) / s.x);
        const double th = std::min(s.t_hi, s.y / s.x);
        if (tl >= th) continue;
        p.v_lo = v_at(tl);
        p.v_hi = v_at(th);
      } else {
        if (s.y > 1) continue;
        p.v_lo = s.t_lo == 0 ? 0.0 : v_at(s.t_lo);
        p.v_hi = std::isinf(s.t_hi) ? kInf : v_at(s.t_hi);
      }
      if (p.v_lo >= p.v_hi) continue;
      pieces.push_back(p);
    }
  } else {
    if (slots >= 1 + competitor_pos) {
      // Every positive bidder is capped at a full unit regardless of the bid.
      CurvePiece p;
      p.form = PieceForm::rational;
      p.y = 1.0;  // x = 0: constant 1 for v > 0, 0 at v = 0
      curve.pieces = {p};
      return curve;
    }
    std::vector<double> breakpoints;  // T = vhat'^{-ell} where a competitor caps at 1
    for (double vh : competitor_vhat) {
      if (vh > 0) breakpoints.push_back(std::pow(vh, -ell));
    }
    const double target = static_cast<double>(slots);
    for (const auto& s : detail::competitor_segments(std::move(breakpoints), 0, target)) {
      if (s.y <= 0 || s.x == 0) continue;  // x = 0 needs y = slots - #positive <= 0 here
      CurvePiece p;
      p.form = PieceForm::rational;
      p.x = s.x;
      p.y = s.y;
      auto v_at = [&](double t) {
        const double g = s.y / t - s.x;
        if (g <= 0) return 0.0;
        return std::isinf(g) ? kInf : std::pow(g, 1.0 / ell) / curve.alpha;
      };
      const double tl = std::max(s.t_lo, (s.y - 1.0) / s.x);
      const double th = std::min(s.t_hi, s.y / s.x);
      if (tl >= th) continue;
      p.v_lo = v_at(th);  // the bid grows as the level shrinks
      p.v_hi = tl == 0 ? kInf : v_at(tl);
      if (p.v_lo >= p.v_hi) continue;
      pieces.push_back(p);
    }
  }

  detail::stitch_pieces(curve, std::move(pieces));
  return curve;
}

// x_i(v) = alpha_i * sum_j (beta_j - beta_{j+1}) * a^{(j)}_i(v) on a common
// refinement of the per-j curves. At most n*k intervals.
struct ClickTerm {
  double coef;  // alpha_i * (beta_j - beta_{j+1})
  PieceForm form;
  double x, y;
};

struct ClickInterval {
  double v_lo, v_hi;
  std::vector<ClickTerm> terms;
};

struct ClickAllocationCurve {
  std::vector<ClickInterval> intervals;
  int advertiser = 0;
  double alpha = 1.0;
  double ell = 1.0;
  Family family = Family::ipa;
  double cap = 0.0;  // alpha_i * beta_1; the limit of x_i as v -> inf

  double eval(double v) const {
    if (v < 0) fail(Errc::negative_value_query);
    size_t lo = 0, hi = intervals.size();
    while (hi - lo > 1) {
      const size_t mid = (lo + hi) / 2;
      if (intervals[mid].v_lo <= v)
        lo = mid;
      else
        hi = mid;
    }
    double s = 0.0;
    for (const auto& t : intervals[lo].terms) {
      CurvePiece p;
      p.form = t.form;
      p.x = t.x;
      p.y = t.y;
      s += t.coef * detail::eval_piece(p, alpha, ell, family, v);
    }
    return s;
  }
};

inline ClickAllocationCurve click_allocation_curve(const AuctionInstance& inst, int advertiser,
                                                   double ell, Family family) {
  ClickAllocationCurve curve;
  curve.advertiser = advertiser;
  curve.alpha = inst.alpha.at(advertiser);
  curve.ell = ell;
  curve.family = family;
  curve.cap = inst.k > 0 ? curve.alpha * inst.beta[0] : 0.0;

  std::vector<AllocationCurve> per_slot;
  std::vector<double> weights;
  std::vector<double> boundaries{0.0};
  for (int j = 1; j <= inst.k; ++j) {
    const double w = inst.beta[j - 1] - (j < inst.k ? inst.beta[j] : 0.0);
    if (w == 0.0) continue;  // slot adds nothing to the click total
    per_slot.push_back(allocation_curve(inst, advertiser, j, ell, family));
    weights.push_back(curve.alpha * w);
    for (const auto& p : per_slot.back().pieces) boundaries.push_back(p.v_lo);
  }
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());

  std::vector<size_t> cursor(per_slot.size(), 0);
  for (size_t b = 0; b < boundaries.size(); ++b) {
    ClickInterval iv;
    iv.v_lo = boundaries[b];
    iv.v_hi = b + 1 < boundaries.size() ? boundaries[b + 1] : kInf;
    for (size_t c = 0; c < per_slot.size(); ++c) {
      const auto& pieces = per_slot[c].pieces;
      while (cursor[c] + 1 < pieces.size() && pieces[cursor[c] + 1].v_lo <= iv.v_lo) ++cursor[c];
      const CurvePiece& p = pieces[cursor[c]];
      iv.terms.push_back({weights[c], p.form, p.x, p.y});
    }
    curve.intervals.push_back(std::move(iv));
  }
  return curve;
}

enum class IntegrationMethod { automatic, closed_form, quadrature };

struct PaymentResult {
  double payment = 0.0;
  double allocation = 0.0;
  int pieces = 0;
  std::string method;
};

namespace detail {

// 10-point Gauss-Legendre on [-1, 1].
inline constexpr double kGlNode[5] = {0.1488743389816312, 0.4333953941292472,
                                      0.6794095682990244, 0.8650633666889845,
                                      0.9739065285171717};
inline constexpr double kGlWeight[5] = {0.2955242247147529, 0.2692667193099963,
                                        0.2190863625159820, 0.1494513491505806,
                                        0.0666713443086881};

template <class F>
double gauss_legendre(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int q = 0; q < 5; ++q) {
    s += kGlWeight[q] * (f(mid + half * kGlNode[q]) + f(mid - half * kGlNode[q]));
  }
  return s * half;
}

template <class F>
double adaptive_gl(const F& f, double a, double b, double rel_tol, int depth = 0) {
  const double whole = gauss_legendre(f, a, b);
  const double mid = 0.5 * (a + b);
  const double halves = gauss_legendre(f, a, mid) + gauss_legendre(f, mid, b);
  if (depth >= 40 || std::abs(whole - halves) <= rel_tol * std::abs(halves) + 1e-15 * (b - a))
    return halves;
  return adaptive_gl(f, a, mid, rel_tol, depth + 1) + adaptive_gl(f, mid, b, rel_tol, depth + 1);
}

// Antiderivative of one click term on [a, b] for ell = 1.
inline double term_integral_ell1(const ClickTerm& t, double alpha, Family family, double a,
                                 double b) {
  switch (t.form) {
    case PieceForm::zero: return 0.0;
    case PieceForm::one: return t.coef * (b - a);
    case PieceForm::rational: break;
  }
  if (family == Family::ipa) {
    if (t.x == 0.0) return t.coef * (1.0 - t.y) * (b - a);
    const double xa = t.x * alpha;
    return t.coef * ((b - a) - (t.y / xa) * (std::log1p(xa * b) - std::log1p(xa * a)));
  }
  if (t.x == 0.0) return t.coef * t.y * (b - a);
  return t.coef * t.y *
         ((b - a) - (t.x / alpha) * (std::log(alpha * b + t.x) - std::log(alpha * a + t.x)));
}

}  // namespace detail

// Myerson payment p(v) = v * x(v) - integral_0^v x(z) dz. The ell = 1
// integral is in closed form (logarithms); general ell uses adaptive
// Gauss-Legendre at relative tolerance 1e-10 per interval.
inline PaymentResult myerson_payment(const ClickAllocationCurve& curve, double v,
                                     IntegrationMethod method = IntegrationMethod::automatic) {
  if (v < 0 || std::isnan(v)) fail(Errc::negative_value_query);
  if (method == IntegrationMethod::closed_form && curve.ell != 1.0)
    fail(Errc::invalid_config, "closed-form integration is only available at ell = 1");

  const bool closed = method == IntegrationMethod::closed_form ||
                      (method == IntegrationMethod::automatic && curve.ell == 1.0);

  PaymentResult out;
  out.allocation = curve.eval(v);
  out.pieces = static_cast<int>(curve.intervals.size());
  out.method = closed ? "closed_form" : "quadrature";

  double integral = 0.0;
  for (const auto& iv : curve.intervals) {
    if (iv.v_lo >= v) break;
    const double a = iv.v_lo, b = std::min(iv.v_hi, v);
    if (closed) {
      for (const auto& t : iv.terms)
        integral += detail::term_integral_ell1(t, curve.alpha, curve.family, a, b);
    } else {
      integral += detail::adaptive_gl([&](double z) { return curve.eval(z); }, a, b, 1e-10);
    }
  }

  double p = v * out.allocation - integral;
  if (p < 0) {
    if (p < -1e-9) throw std::logic_error("negative payment; curve integration is inconsistent");
    p = 0.0;
  }
  out.payment = p;
  return out;
}

}  // namespace fairslot
