#include <catch2/catch_amalgamated.hpp>

#include "fairslot/feasibility.hpp"
#include "fairslot/oracles.hpp"
#include "support.hpp"

using namespace fairslot;
using Catch::Approx;
using testsupport::kunit_instance;

namespace {

void check_reconstruction(const MatchingDistribution& dist,
                          const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> recon(n, std::vector<double>(n, 0.0));
  double weight_sum = 0.0;
  for (const auto& e : dist.entries) {
    weight_sum += e.weight;
    for (int i = 0; i < n; ++i) recon[i][e.assignment[i]] += e.weight;
  }
  CHECK(weight_sum == Approx(1.0).margin(1e-9));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) CHECK(recon[i][j] == Approx(a[i][j]).margin(1e-9));
  }
}

}  // namespace

TEST_CASE("doubly stochastic extension of the frozen IPA example") {
  const auto m = generalized_ipa(kunit_instance({4, 2, 1}, 2), 1.0);
  const auto a = extend_doubly_stochastic(m);
  CHECK(a[0][2] == Approx(1.0 / 7).margin(1e-12));
  CHECK(a[1][2] == Approx(2.0 / 7).margin(1e-12));
  CHECK(a[2][2] == Approx(4.0 / 7).margin(1e-12));
  for (int i = 0; i < 3; ++i) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < 3; ++j) {
      row += a[i][j];
      col += a[j][i];
    }
    CHECK(row == Approx(1.0).margin(1e-9));
    CHECK(col == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("square matrices extend verbatim") {
  const auto m = generalized_ipa(kunit_instance({3, 2, 1}, 3), 1.0);
  CHECK(extend_doubly_stochastic(m) == m.m);
}

TEST_CASE("uniform matrix gets uniform dummy columns") {
  const auto m = generalized_ipa(kunit_instance({2, 2, 2, 2}, 2), 1.0);
  const auto a = extend_doubly_stochastic(m);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(a[i][j] == Approx(0.25).margin(1e-12));
  }
}

TEST_CASE("extension rejects corrupted input") {
  AllocationMatrix bad;
  bad.m = {{0.9, 0.1}, {0.0, 0.1}};  // second column sums to 0.2
  bad.cumulative = {{0, 0}, {0.9, 0.0}, {1.0, 0.1}};
  CHECK_THROWS_AS(extend_doubly_stochastic(bad), Error);
}

TEST_CASE("identity decomposes into a single permutation") {
  const auto dist = bvn_decompose({{1.0, 0.0}, {0.0, 1.0}});
  REQUIRE(dist.entries.size() == 1);
  CHECK(dist.entries[0].weight == 1.0);
  CHECK(dist.entries[0].assignment == std::vector<int>{0, 1});
}

TEST_CASE("2x2 doubly stochastic matrices have the unique decomposition") {
  const auto dist = bvn_decompose({{0.6, 0.4}, {0.4, 0.6}});
  REQUIRE(dist.entries.size() == 2);
  double id_w = 0.0, swap_w = 0.0;
  for (const auto& e : dist.entries) {
    (e.assignment[0] == 0 ? id_w : swap_w) = e.weight;
  }
  CHECK(id_w == Approx(0.6).margin(1e-12));
  CHECK(swap_w == Approx(0.4).margin(1e-12));
}

TEST_CASE("decomposition fails loudly off the Birkhoff polytope") {
  CHECK_THROWS_AS(bvn_decompose({{0.5, 0.0}, {0.0, 0.5}}, 1e-12), Error);
}

TEST_CASE("mechanism matrices decompose and reconstruct") {
  oracles::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(1, 12);
    const int k = rng.uniform_int(0, std::min(n, 6));
    const double ell = rng.log_uniform(0.5, 4.0);
    const auto inst = oracles::random_instance(rng, n, k);
    for (Family fam : {Family::ipa, Family::pa}) {
      const auto m = generalized_allocation(inst, {fam, ell});
      const auto a = extend_doubly_stochastic(m);
      const auto dist = bvn_decompose(m);
      check_reconstruction(dist, a);
      const size_t bound = n >= 2 ? static_cast<size_t>(n) * n - 2 * n + 2 : 1;
      CHECK(dist.entries.size() <= bound);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
          CHECK(dist.marginal(i, j) == Approx(m.m[i][j]).margin(1e-9));
        }
      }
    }
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const auto m = generalized_ipa(kunit_instance({4, 2, 1}, 2), 1.0);
  const auto dist = bvn_decompose(m);
  for (uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    CHECK(sample_matching(dist, seed) == sample_matching(dist, seed));
  }
}

TEST_CASE("single-entry distributions always return their assignment") {
  MatchingDistribution dist;
  dist.n = 2;
  dist.k = 2;
  dist.entries.push_back({1.0, {1, 0}});
  for (uint64_t seed = 0; seed < 17; ++seed) {
    CHECK(sample_matching(dist, seed) == std::vector<int>{1, 0});
  }
}

TEST_CASE("empirical sampling frequencies match the weights") {
  MatchingDistribution dist;
  dist.n = 2;
  dist.k = 2;
  dist.entries.push_back({0.6, {0, 1}});
  dist.entries.push_back({0.4, {1, 0}});
  const int trials = 100000;
  int id_count = 0;
  for (int seed = 0; seed < trials; ++seed) {
    id_count += sample_matching(dist, seed)[0] == 0 ? 1 : 0;
  }
  // 3 sigma for Bin(1e5, 0.6) is ~0.0046
  CHECK(std::abs(id_count / static_cast<double>(trials) - 0.6) < 0.005);
}
