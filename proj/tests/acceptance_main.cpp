// Acceptance suite: every criterion prints one PASS/FAIL line; the exit code
// is the number of failed criteria. Tolerances are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fairslot/fairslot.hpp"

using namespace fairslot;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, double seconds) {
  std::printf("%s criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

constexpr double kElls[4] = {0.5, 1.0, 2.0, 4.0};
const oracles::OracleConfig kOracleCfg{};  // defaults: tol 1e-12, grid 1e5, 1e4 trials

AuctionInstance fuzz_instance(oracles::Rng& rng, int max_n, int max_k, int min_n = 1,
                              int min_k = 0) {
  const int n = rng.uniform_int(min_n, max_n);
  const int k = rng.uniform_int(min_k, std::min(n, max_k));
  return oracles::random_instance(rng, n, k);
}

// --- criterion 1: feasibility ----------------------------------------------

bool feasibility_suite(std::string& what) {
  oracles::Rng rng(101);
  const int trials = kOracleCfg.fuzz_trials;
  size_t max_entries_margin = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto inst = fuzz_instance(rng, 20, 6);
    const double ell = kElls[trial % 4];
    const int n = inst.n(), k = inst.k;
    for (Family fam : {Family::ipa, Family::pa}) {
      const auto m = generalized_allocation(inst, {fam, ell});
      for (int j = 0; j < k; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) {
          col += m.m[i][j];
          // pre-clamp differences straight from the cumulative vectors
          if (m.cumulative[j + 1][i] - m.cumulative[j][i] < -1e-12) {
            what = "pre-clamp column entry below -1e-12";
            return false;
          }
        }
        if (std::abs(col - 1.0) > 1e-9) {
          what = "column sum off by more than 1e-9";
          return false;
        }
      }
      for (int i = 0; i < n; ++i) {
        if (m.row_sum(i) > 1.0 + 1e-9) {
          what = "row sum exceeds 1";
          return false;
        }
      }

      const auto a = extend_doubly_stochastic(m);
      const auto dist = bvn_decompose(m);
      const size_t bound = n >= 2 ? static_cast<size_t>(n) * n - 2 * n + 2 : 1;
      if (dist.entries.size() > bound) {
        what = "BvN entry count exceeds n^2-2n+2";
        return false;
      }
      max_entries_margin = std::max(max_entries_margin, dist.entries.size());

      std::vector<double> recon(static_cast<size_t>(n) * n, 0.0);
      for (const auto& e : dist.entries) {
        for (int i = 0; i < n; ++i) recon[i * n + e.assignment[i]] += e.weight;
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (std::abs(recon[i * n + j] - a[i][j]) > 1e-9) {
            what = "BvN reconstruction error above 1e-9";
            return false;
          }
        }
      }
    }
  }
  what = "feasibility + BvN on 10^4 instances, both families";
  return true;
}

// --- criteria 2-4: welfare --------------------------------------------------

bool ipa_welfare_bound(std::string& what) {
  if (ipa_bound(1.0) != 0.75) {
    what = "ipa_bound(1) is not exactly 0.75";
    return false;
  }
  oracles::Rng rng(202);
  for (int trial = 0; trial < kOracleCfg.fuzz_trials; ++trial) {
    const auto inst = fuzz_instance(rng, 20, 6);
    const double ell = kElls[trial % 4];
    const auto r = evaluate_welfare(inst, {Family::ipa, ell});
    if (r.ratio < ipa_bound(ell) - 1e-9) {
      what = "IPA ratio fell below 1 - l^l/(1+l)^(l+1)";
      return false;
    }
  }
  what = "IPA welfare ratio >= bound on 10^4 instances; bound(1) = 0.75";
  return true;
}

bool ipa_tightness(std::string& what) {
  double prev = 1.0;
  double last = 1.0;
  for (int n : {13, 25, 49, 101}) {
    const auto inst = ipa_tight_instance(1, n, 0.5);
    const auto r = evaluate_welfare(inst, {Family::ipa, 1.0});
    const double closed = ipa_tight_ratio(1, n, 0.5);
    if (std::abs(r.ratio - closed) > 1e-9) {
      what = "mechanism ratio disagrees with the closed form";
      return false;
    }
    if (!(r.ratio < prev) || r.ratio < 0.75) {
      what = "tight-family ratios are not decreasing toward 3/4";
      return false;
    }
    prev = r.ratio;
    last = r.ratio;
  }
  if (std::abs(ipa_tight_ratio(1, 13, 0.5) - 0.76) > 1e-9 || last > 0.7515) {
    what = "endpoints 0.76 (n=13) / <=0.7515 (n=101) missed";
    return false;
  }
  what = "tight family: 0.76 at n=13 decreasing to 0.7512 at n=101";
  return true;
}

bool pa_welfare_bound(std::string& what) {
  oracles::Rng rng(404);
  for (int trial = 0; trial < kOracleCfg.fuzz_trials; ++trial) {
    const auto inst = fuzz_instance(rng, 20, 6);
    const double ell = kElls[trial % 4];
    const auto r = evaluate_welfare(inst, {Family::pa, ell});
    if (r.applicable && r.ratio < r.bound - 1e-9) {
      what = "PA ratio fell below its applicable bound";
      return false;
    }
  }

  // n=2, k=1, ell=1: the observed worst grid ratio matches the minimizer.
  double min_ratio = 1.0;
  for (int g = 1; g <= 1000; ++g) {
    const double c = g / 1000.0;
    AuctionInstance inst;
    inst.values = {1.0, c};
    inst.alpha = {1.0, 1.0};
    inst.beta = {1.0};
    inst.k = 1;
    inst = validate_instance(std::move(inst));
    const auto r = evaluate_welfare(inst, {Family::pa, 1.0});
    min_ratio = std::min(min_ratio, r.ratio);
  }
  const double reference = oracles::pa_worst_ratio(2, 1, 1.0);
  if (std::abs(min_ratio - reference) > 1e-3) {
    what = "grid minimum does not match the numeric minimizer at n=2, k=1";
    return false;
  }
  what = "PA ratio >= bound where applicable; worst n=2 grid ratio = 0.8284 +- 1e-3";
  return true;
}

// --- criterion 5: stability suites ------------------------------------------

struct PairCase {
  AuctionInstance a, b;
  double lambda_eff;
  double ell;
};

PairCase stability_pair(uint64_t trial, uint64_t salt) {
  oracles::Rng meta(0xABCD0000 + trial * 2 + salt);
  const int n = meta.uniform_int(2, 20);
  const int k = meta.uniform_int(1, std::min(n, 6));
  const double lam_max = meta.log_uniform(1.0, 16.0);
  const auto strategy = trial % 2 == 0 ? oracles::PairStrategy::random
                                       : oracles::PairStrategy::single_coordinate;
  PairCase pc;
  auto [a, b] = oracles::pair_generator(trial + salt * 1000003, n, k, lam_max, strategy);
  pc.a = std::move(a);
  pc.b = std::move(b);
  pc.lambda_eff = lambda_of(effective_values(pc.a).vhat, effective_values(pc.b).vhat);
  pc.ell = kElls[trial % 4];
  return pc;
}

bool stability_suites(std::string& what) {
  const int trials = kOracleCfg.fuzz_trials;

  for (int trial = 0; trial < trials; ++trial) {  // k-unit IPA, l-inf
    const auto pc = stability_pair(trial, 1);
    const double bound = stability_bound(pc.lambda_eff, pc.ell);
    const auto aa = kunit_ipa(effective_values(pc.a), pc.a.k, pc.ell);
    const auto ab = kunit_ipa(effective_values(pc.b), pc.b.k, pc.ell);
    for (int i = 0; i < pc.a.n(); ++i) {
      if (std::abs(aa.a[i] - ab.a[i]) > bound + 1e-9) {
        what = "k-unit IPA deviation above f_l(lambda)";
        return false;
      }
    }
  }

  for (int trial = 0; trial < trials; ++trial) {  // generalized IPA, weak + ordered
    const auto pc = stability_pair(trial, 2);
    const double f = stability_bound(pc.lambda_eff, pc.ell);
    const auto m = generalized_ipa(pc.a, pc.ell);
    const auto mp = generalized_ipa(pc.b, pc.ell);
    const auto weak = weak_vs_audit(m, mp, pc.lambda_eff, pc.ell);
    if (weak.measured > 2.0 * f + 1e-9) {
      what = "generalized IPA entry deviation above 2 f_l(lambda)";
      return false;
    }
    const auto ordered = ordered_vs_audit_all(m, mp, pc.lambda_eff, pc.ell);
    if (ordered.measured > f + 1e-9) {
      what = "generalized IPA prefix deviation above f_l(lambda)";
      return false;
    }
  }

  for (int trial = 0; trial < trials; ++trial) {  // k-unit PA, total variation
    // The k-unit subset deviation scales with k (k units move k times the
    // mass); the (l^e-1)/(l^e+1) guarantee holds for the allocation as a
    // distribution, so the per-unit deviation is what gets checked.
    const auto pc = stability_pair(trial, 3);
    const double le = std::pow(pc.lambda_eff, pc.ell);
    const double bound = std::isinf(le) ? 1.0 : (le - 1.0) / (le + 1.0);
    const auto aa = kunit_pa(effective_values(pc.a), pc.a.k, pc.ell);
    const auto ab = kunit_pa(effective_values(pc.b), pc.b.k, pc.ell);
    const auto rec = tv_deviation(aa.a, ab.a, bound);
    if (rec.measured / pc.a.k > bound + 1e-9) {
      what = "k-unit PA per-unit subset deviation above (l^e-1)/(l^e+1)";
      return false;
    }
  }

  for (int trial = 0; trial < trials; ++trial) {  // generalized PA, per-column TV
    const auto pc = stability_pair(trial, 4);
    const double bound = 2.0 * stability_bound(pc.lambda_eff, pc.ell);
    const auto m = generalized_pa(pc.a, pc.ell);
    const auto mp = generalized_pa(pc.b, pc.ell);
    for (const auto& rec : tv_vs_audit(m, mp, bound)) {
      if (rec.measured > bound + 1e-9) {
        what = "generalized PA column TV above 2 f_l(lambda)";
        return false;
      }
    }
  }

  for (int trial = 0; trial < trials; ++trial) {  // heterogeneous preferences
    oracles::Rng rng(0xBEEF0000 + trial);
    const int n = rng.uniform_int(2, 20);
    const int k = rng.uniform_int(1, std::min(n, 6));
    const double ell = kElls[trial % 4];
    const double lam_max = rng.log_uniform(1.0, 16.0);
    AuctionInstance a = oracles::random_instance(rng, n, k);
    AuctionInstance b = a;
    for (int i = 0; i < n; ++i) {
      b.values[i] *= rng.log_uniform(1.0 / lam_max, lam_max);
      b.alpha[i] = rng.log_uniform(1e-1, 10.0);
    }
    b = validate_instance(std::move(b));
    const double lambda_v = lambda_of(a.values, b.values);
    const Family fam = trial % 2 == 0 ? Family::ipa : Family::pa;
    const auto m = generalized_allocation(a, {fam, ell});
    const auto mp = generalized_allocation(b, {fam, ell});
    const auto rec = heterogeneous_pref_audit(m, mp, a.alpha, b.alpha, lambda_v, ell);
    if (!rec.satisfied) {
      what = "heterogeneous prefix inequality violated";
      return false;
    }
  }

  what = "five stability suites, 10^4 pairs each, zero violations";
  return true;
}

// --- criterion 6: payments ---------------------------------------------------

bool payments_suite(std::string& what) {
  {
    AuctionInstance inst;
    inst.values = {1.0, 1.0};
    inst.alpha = {1.0, 1.0};
    inst.beta = {1.0};
    inst.k = 1;
    inst = validate_instance(std::move(inst));
    const auto curve = click_allocation_curve(inst, 0, 1.0, Family::ipa);
    const double expected = std::log(2.0) - 0.5;
    if (std::abs(myerson_payment(curve, 1.0).payment - expected) > 1e-9) {
      what = "closed-form payment misses ln 2 - 1/2 at 1e-9";
      return false;
    }
    const auto quad = myerson_payment(curve, 1.0, IntegrationMethod::quadrature);
    if (std::abs(quad.payment - expected) > 1e-6) {
      what = "quadrature payment misses ln 2 - 1/2 at 1e-6";
      return false;
    }
  }

  oracles::Rng rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = fuzz_instance(rng, 8, 3, 2, 1);
    const double ell = kElls[trial % 4];
    const Family fam = trial % 2 == 0 ? Family::ipa : Family::pa;
    const int i = rng.uniform_int(0, inst.n() - 1);
    const auto curve = click_allocation_curve(inst, i, ell, fam);
    const double exact = myerson_payment(curve, inst.values[i]).payment;
    const double oracle = oracles::numeric_payment(inst, i, {fam, ell}, kOracleCfg.payment_grid);
    if (std::abs(exact - oracle) > 1e-6 * std::abs(oracle) + 1e-9) {
      what = "piecewise payment disagrees with the dense numeric oracle";
      return false;
    }
  }

  oracles::Rng probe_rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = fuzz_instance(probe_rng, 8, 3, 2, 1);
    const double ell = kElls[trial % 4];
    const Family fam = trial % 2 == 0 ? Family::ipa : Family::pa;
    const int i = probe_rng.uniform_int(0, inst.n() - 1);
    const double v = inst.values[i];
    const auto curve = click_allocation_curve(inst, i, ell, fam);
    const auto truthful = myerson_payment(curve, v);
    const double base_utility = v * truthful.allocation - truthful.payment;
    for (int mis = 0; mis < 100; ++mis) {
      const double z = v * probe_rng.log_uniform(0.02, 50.0);
      const auto lie = myerson_payment(curve, z);
      if (v * lie.allocation - lie.payment > base_utility + 1e-6) {
        what = "a misreport beat truthful bidding";
        return false;
      }
    }
  }

  what = "closed form, oracle agreement (10^2), truthfulness probe (10^2 x 100)";
  return true;
}

// --- criterion 7: oracle equivalence ----------------------------------------

bool oracle_equivalence(std::string& what) {
  oracles::Rng rng(808);
  for (int trial = 0; trial < kOracleCfg.fuzz_trials; ++trial) {
    const int n = rng.uniform_int(1, 20);
    const int k = rng.uniform_int(0, n);
    const double ell = kElls[trial % 4];
    std::vector<double> vhat(n);
    for (double& v : vhat) v = rng.log_uniform(1e-3, 1e3);
    if (trial % 10 == 0 && n > 1) vhat[rng.uniform_int(0, n - 1)] = 0.0;
    const EffectiveValues ev{vhat};
    for (Family fam : {Family::ipa, Family::pa}) {
      const auto mech = kunit_allocate(ev, k, {fam, ell});
      const auto oracle = oracles::bisect_kunit(ev, k, ell, fam);
      for (int i = 0; i < n; ++i) {
        if (std::abs(mech.a[i] - oracle[i]) > 1e-9) {
          what = "breakpoint solver and bisection disagree beyond 1e-9";
          return false;
        }
      }
    }
  }
  what = "breakpoint vs bisection water levels on 10^4 instances, both families";
  return true;
}

// --- criterion 8: sweep determinism ------------------------------------------

bool sweep_determinism(std::string& what) {
  const char* cli = std::getenv("FAIRSLOT_CLI");
  if (cli == nullptr) {
    what = "FAIRSLOT_CLI is not set";
    return false;
  }
  const fs::path dir = fs::temp_directory_path() / "fairslot_acceptance";
  fs::create_directories(dir);
  const fs::path spec = dir / "spec.json";
  {
    std::ofstream out(spec);
    out << R"({"mode": "random", "n": [5, 12], "k": [1, 3], "ell": [0.5, 1.0],
               "family": ["ipa", "pa"], "trials": 5, "seed": 31337})";
  }
  const fs::path out1 = dir / "sweep1.csv", out2 = dir / "sweep2.csv";
  const std::string base = std::string(cli) + " sweep " + spec.string() + " -o ";
  if (std::system((base + out1.string()).c_str()) != 0 ||
      std::system((base + out2.string()).c_str()) != 0) {
    what = "sweep invocation failed";
    return false;
  }
  std::ifstream f1(out1, std::ios::binary), f2(out2, std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  if (s1.str().empty() || s1.str() != s2.str()) {
    what = "sweep outputs differ between identical runs";
    return false;
  }
  what = "cmd_sweep is byte-identical across runs with a fixed seed";
  return true;
}

template <class F>
void run_criterion(int index, F&& f, bool timed = false, double budget = 0.0) {
  Timer t;
  std::string what;
  bool pass = f(what);
  const double elapsed = t.seconds();
  if (pass && timed && elapsed >= budget) {
    pass = false;
    what += " [exceeded " + std::to_string(budget) + "s budget]";
  }
  report(index, pass, what, elapsed);
}

}  // namespace

int main() {
  run_criterion(1, feasibility_suite, true, 60.0);
  run_criterion(2, ipa_welfare_bound);
  run_criterion(3, ipa_tightness);
  run_criterion(4, pa_welfare_bound);
  run_criterion(5, stability_suites);
  run_criterion(6, payments_suite);
  run_criterion(7, oracle_equivalence);
  run_criterion(8, sweep_determinism);
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  }
  return g_failures;
}
