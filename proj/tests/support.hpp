#pragma once

#include <vector>

#include "fairslot/core.hpp"

namespace testsupport {

inline fairslot::AuctionInstance make_instance(std::vector<double> values,
                                               std::vector<double> alpha,
                                               std::vector<double> beta, int k) {
  fairslot::AuctionInstance inst;
  inst.values = std::move(values);
  inst.alpha = std::move(alpha);
  inst.beta = std::move(beta);
  inst.k = k;
  return fairslot::validate_instance(std::move(inst));
}

// k-unit setting: flat beta, unit alpha, bids equal to effective values.
inline fairslot::AuctionInstance kunit_instance(std::vector<double> vhat, int k) {
  const int n = static_cast<int>(vhat.size());
  return make_instance(std::move(vhat), std::vector<double>(n, 1.0),
                       std::vector<double>(k, 1.0), k);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace testsupport
