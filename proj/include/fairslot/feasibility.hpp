#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fairslot/errors.hpp"
#include "fairslot/position.hpp"

namespace fairslot {

// A lottery over deterministic ad->position assignments realizing an
// allocation matrix. Positions k..n-1 are dummy "not shown" slots.
struct MatchingEntry {
  double weight;
  std::vector<int> assignment;  // advertiser i -> position assignment[i]
};

struct MatchingDistribution {
  std::vector<MatchingEntry> entries;
  int n = 0;
  int k = 0;

  // Exact marginal Pr[i -> j] implied by the entries.
  double marginal(int i, int j) const {
    double p = 0.0;
    for (const auto& e : entries) {
      if (e.assignment[i] == j) p += e.weight;
    }
    return p;
  }
};

// Pads the n x k matrix with n-k dummy columns carrying each row's
// unallocated mass, split evenly. The result is doubly stochastic; with
// n = k the matrix is returned verbatim.
inline std::vector<std::vector<double>> extend_doubly_stochastic(const AllocationMatrix& alloc) {
  const int n = alloc.n();
  const int k = alloc.k();
  for (int j = 0; j < k; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) {
      if (alloc.m[i][j] < -1e-12) fail(Errc::not_substochastic, "negative entry");
      col += alloc.m[i][j];
    }
    if (std::abs(col - 1.0) > 1e-9) fail(Errc::not_substochastic, "column sum differs from 1");
  }

  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) {
      a[i][j] = alloc.m[i][j];
      row += alloc.m[i][j];
    }
    if (row > 1.0 + 1e-9) fail(Errc::not_substochastic, "row sum exceeds 1");
    if (n > k) {
      const double dummy = std::max(0.0, 1.0 - row) / (n - k);
      for (int j = k; j < n; ++j) a[i][j] = dummy;
    }
  }
  return a;
}

namespace detail {

// Augmenting-path search on the support of `rem` (entries > tol). Rows and
// columns are scanned in index order so the decomposition is reproducible.
struct SupportMatcher {
  const std::vector<double>& rem;
  int n;
  double tol;
  std::vector<int> match_row;  // row -> col
  std::vector<int> match_col;  // col -> row
  std::vector<int> visited;
  int stamp = 0;

  SupportMatcher(const std::vector<double>& matrix, int size, double tolerance)
      : rem(matrix), n(size), tol(tolerance), match_row(size, -1), match_col(size, -1),
        visited(size, -1) {}

  bool augment(int row) {
    for (int j = 0; j < n; ++j) {
      if (rem[row * n + j] <= tol || visited[j] == stamp) continue;
      visited[j] = stamp;
      if (match_col[j] == -1 || augment(match_col[j])) {
        match_row[row] = j;
        match_col[j] = row;
        return true;
      }
    }
    return false;
  }

  bool repair(int row) {
    ++stamp;
    return augment(row);
  }
};

}  // namespace detail

// Birkhoff-von Neumann decomposition of a doubly stochastic matrix: each
// round takes a perfect matching on the positive support, records it with
// the minimum matched entry as weight, and subtracts. The matching from the
// previous round is kept and only rows whose matched entry vanished are
// re-augmented. Trailing mass below n*tol is floating-point dust; it is
// dropped and the weights renormalized.
inline MatchingDistribution bvn_decompose(const std::vector<std::vector<double>>& matrix,
                                          double tol = 1e-12) {
  const int n = static_cast<int>(matrix.size());
  MatchingDistribution dist;
  dist.n = n;
  dist.k = n;  // a raw square matrix has no dummy slots
  if (n == 0) return dist;

  std::vector<double> rem(static_cast<size_t>(n) * n);
  double total = 0.0;
  std::vector<double> col_sums(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(matrix[i].size()) != n) fail(Errc::not_substochastic, "matrix not square");
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (matrix[i][j] < -tol) fail(Errc::no_perfect_matching, "negative entry");
      rem[i * n + j] = matrix[i][j];
      total += matrix[i][j];
      row_sum += matrix[i][j];
      col_sums[j] += matrix[i][j];
    }
    if (std::abs(row_sum - 1.0) > 1e-9) fail(Errc::no_perfect_matching, "row sum differs from 1");
  }
  for (double c : col_sums) {
    if (std::abs(c - 1.0) > 1e-9) fail(Errc::no_perfect_matching, "column sum differs from 1");
  }

  const size_t entry_bound = n >= 2 ? static_cast<size_t>(n) * n - 2 * n + 2 : 1;
  detail::SupportMatcher matcher(rem, n, tol);

  while (total >= n * tol) {
    for (int i = 0; i < n; ++i) {
      if (matcher.match_row[i] != -1) continue;
      if (!matcher.repair(i)) {
        if (total < 1e-9) {
          total = 0.0;  // dust that no longer supports a matching
          break;
        }
        fail(Errc::no_perfect_matching, "support has no perfect matching; input is corrupt");
      }
    }
    if (total == 0.0) break;

    double w = kInf;
    for (int i = 0; i < n; ++i) w = std::min(w, rem[i * n + matcher.match_row[i]]);

    MatchingEntry entry;
    entry.weight = w;
    entry.assignment = matcher.match_row;
    dist.entries.push_back(std::move(entry));
    if (dist.entries.size() > entry_bound)
      throw std::logic_error("BvN decomposition exceeded its entry bound");

    for (int i = 0; i < n; ++i) {
      const int j = matcher.match_row[i];
      double& cell = rem[i * n + j];
      cell -= w;
      if (cell <= tol) {
        cell = std::max(cell, 0.0);
        matcher.match_row[i] = -1;  // edge left the support; re-augment next round
        matcher.match_col[j] = -1;
      }
    }
    total -= w * n;
  }

  double weight_sum = 0.0;
  for (const auto& e : dist.entries) weight_sum += e.weight;
  if (weight_sum <= 0) fail(Errc::no_perfect_matching, "no mass decomposed");
  for (auto& e : dist.entries) e.weight /= weight_sum;
  return dist;
}

inline MatchingDistribution bvn_decompose(const AllocationMatrix& alloc, double tol = 1e-12) {
  auto dist = bvn_decompose(extend_doubly_stochastic(alloc), tol);
  dist.k = alloc.k();
  return dist;
}

namespace detail {

// splitmix64; keeps seeded draws identical across platforms and standard
// library implementations.
struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return (next() >> 11) * 0x1.0p-53; }
};

}  // namespace detail

// Draws one assignment from the lottery. Deterministic in the seed.
inline std::vector<int> sample_matching(const MatchingDistribution& dist, uint64_t seed) {
  detail::SplitMix64 rng(seed);
  const double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& e : dist.entries) {
    acc += e.weight;
    if (u < acc) return e.assignment;
  }
  return dist.entries.back().assignment;
}

}  // namespace fairslot
