#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fairslot/core.hpp"
#include "fairslot/kunit.hpp"

namespace fairslot {

// n x k allocation matrix: m[i][j] is the probability that ad i shows in
// slot j. Built as successive differences of the k-unit allocations; the
// cumulative vectors a^(0)..a^(k) are kept because payments and the ordered
// stability audits consume them directly.
struct AllocationMatrix {
  std::vector<std::vector<double>> m;           // n rows, k columns
  std::vector<std::vector<double>> cumulative;  // k+1 vectors of length n

  int n() const { return static_cast<int>(m.size()); }
  int k() const { return m.empty() ? static_cast<int>(cumulative.size()) - 1
                                   : static_cast<int>(m[0].size()); }
  double row_sum(int i) const { return cumulative.back()[i]; }
};

namespace detail {

inline AllocationMatrix telescope(const AuctionInstance& inst, const MechanismConfig& cfg) {
  const int n = inst.n();
  const int k = inst.k;
  const EffectiveValues ev = effective_values(inst);

  AllocationMatrix out;
  out.cumulative.assign(k + 1, std::vector<double>(n, 0.0));
  for (int h = 1; h <= k; ++h) out.cumulative[h] = kunit_allocate(ev, h, cfg).a;

  out.m.assign(n, std::vector<double>(k, 0.0));
  for (int j = 0; j < k; ++j) {
    bool clamped = false;
    double col_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = out.cumulative[j + 1][i] - out.cumulative[j][i];
      if (d < 0) {
        // k-unit allocations are monotone in k; anything beyond rounding
        // noise means a solver defect, not an input problem.
        if (d < -1e-12) throw std::logic_error("allocation column went negative beyond noise");
        d = 0.0;
        clamped = true;
      }
      out.m[i][j] = d;
      col_sum += d;
    }
    if (clamped && col_sum > 0) {
      for (int i = 0; i < n; ++i) out.m[i][j] /= col_sum;
    }
  }
  return out;
}

}  // namespace detail

// Generalized IPA: column j is the difference between the j-unit and
// (j-1)-unit IPA allocations. Independent of beta; beta enters welfare and
// payments only.
inline AllocationMatrix generalized_ipa(const AuctionInstance& inst, double ell) {
  return detail::telescope(inst, MechanismConfig{Family::ipa, ell});
}

// Generalized PA: same telescoping over the k-unit PA allocations.
inline AllocationMatrix generalized_pa(const AuctionInstance& inst, double ell) {
  return detail::telescope(inst, MechanismConfig{Family::pa, ell});
}

inline AllocationMatrix generalized_allocation(const AuctionInstance& inst,
                                               const MechanismConfig& cfg) {
  return detail::telescope(inst, cfg);
}

}  // namespace fairslot
