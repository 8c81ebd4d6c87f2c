// Command-line front end: run the allocation mechanisms, realize matrices as
// matching lotteries, compute truthful payments, audit the stability
// definitions, and sweep welfare experiments into plot-ready CSV.
//
// Exit codes: 0 success, 2 input/validation error, 3 property violation.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairslot/fairslot.hpp"

namespace {

using fairslot::io::json;

struct CliError {
  int exit_code;
  json diagnostic;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{2, {{"error", "FileNotFound"}, {"detail", path}}};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw CliError{2, {{"error", "ParseError"}, {"detail", path + ": " + e.what()}}};
  }
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw CliError{2, {{"error", "OutputError"}, {"detail", out_path}}};
  out << content;
}

void emit_json(const std::string& out_path, const json& j) { emit(out_path, j.dump(2) + "\n"); }

int thread_budget(size_t work_items) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("FAIRSLOT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(std::min<size_t>(hw, std::max<size_t>(work_items, 1)));
}

struct CommonArgs {
  std::string instance_path;
  std::string config_path;
  std::string family = "ipa";
  double ell = 1.0;
  std::string output;
  bool family_set = false;
  bool ell_set = false;
};

void add_config_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "mechanism config JSON {family, ell}");
  cmd->add_option("--family", args.family, "mechanism family: ipa or pa")
      ->check(CLI::IsMember({"ipa", "pa"}))
      ->each([&args](const std::string&) { args.family_set = true; });
  cmd->add_option("--ell", args.ell, "stability exponent ell > 0")
      ->each([&args](const std::string&) { args.ell_set = true; });
  cmd->add_option("-o,--output", args.output, "output path (default: stdout)");
}

// Config file first, explicit flags override.
fairslot::MechanismConfig resolve_config(const CommonArgs& args) {
  fairslot::MechanismConfig cfg;
  if (!args.config_path.empty()) cfg = fairslot::io::config_from_json(parse_json_file(args.config_path));
  if (args.family_set || args.config_path.empty())
    cfg.family = args.family == "pa" ? fairslot::Family::pa : fairslot::Family::ipa;
  if (args.ell_set || args.config_path.empty()) cfg.ell = args.ell;
  return fairslot::validate_config(cfg);
}

fairslot::AuctionInstance load_instance(const std::string& path) {
  return fairslot::io::instance_from_json(parse_json_file(path));
}

// ---------------------------------------------------------------------------

int cmd_allocate(const CommonArgs& args) {
  const auto inst = load_instance(args.instance_path);
  const auto cfg = resolve_config(args);
  emit_json(args.output, fairslot::io::matrix_to_json(fairslot::generalized_allocation(inst, cfg)));
  return 0;
}

int cmd_decompose(const CommonArgs& args, double tolerance) {
  const auto inst = load_instance(args.instance_path);
  const auto cfg = resolve_config(args);
  const auto dist = fairslot::bvn_decompose(fairslot::generalized_allocation(inst, cfg), tolerance);
  emit_json(args.output, fairslot::io::matching_to_json(dist));
  return 0;
}

int cmd_sample(const CommonArgs& args, double tolerance, uint64_t seed) {
  const auto inst = load_instance(args.instance_path);
  const auto cfg = resolve_config(args);
  const auto dist = fairslot::bvn_decompose(fairslot::generalized_allocation(inst, cfg), tolerance);
  const auto assignment = fairslot::sample_matching(dist, seed);
  json row = json::array();
  for (int pos : assignment) row.push_back(pos < dist.k ? pos : -1);
  emit_json(args.output, json{{"seed", seed}, {"assignment", std::move(row)}});
  return 0;
}

json pay_one(const fairslot::AuctionInstance& inst, const fairslot::MechanismConfig& cfg,
             int advertiser, bool with_oracle) {
  const auto curve = fairslot::click_allocation_curve(inst, advertiser, cfg.ell, cfg.family);
  const auto res = fairslot::myerson_payment(curve, inst.values[advertiser]);
  json j{{"advertiser", advertiser},
         {"allocation", res.allocation},
         {"payment", res.payment},
         {"pieces", res.pieces},
         {"method", res.method}};
  if (res.allocation > 1e-12) j["per_click"] = res.payment / res.allocation;
  if (with_oracle) {
    const double oracle = fairslot::oracles::numeric_payment(inst, advertiser, cfg, 20000);
    j["oracle_payment"] = oracle;
    j["oracle_delta"] = res.payment - oracle;
  }
  return j;
}

int cmd_pay(const CommonArgs& args, int advertiser, bool advertiser_set, bool with_oracle) {
  const auto inst = load_instance(args.instance_path);
  const auto cfg = resolve_config(args);
  if (advertiser_set) {
    if (advertiser < 0 || advertiser >= inst.n())
      fairslot::fail(fairslot::Errc::dimension_mismatch, "advertiser index out of range");
    emit_json(args.output, pay_one(inst, cfg, advertiser, with_oracle));
    return 0;
  }
  json rows = json::array();
  for (int i = 0; i < inst.n(); ++i) rows.push_back(pay_one(inst, cfg, i, with_oracle));
  emit_json(args.output, rows);
  return 0;
}

fairslot::FairnessReport run_audits(const fairslot::AuctionInstance& a,
                                    const fairslot::AuctionInstance& b,
                                    const fairslot::MechanismConfig& cfg,
                                    const std::vector<std::string>& definitions,
                                    std::optional<double> lambda_override) {
  using namespace fairslot;
  if (a.n() != b.n() || a.k != b.k)
    fail(Errc::dimension_mismatch, "audited instances need the same n and k");

  FairnessReport rep;
  // --lambda declares how similar the caller considers the two users; the
  // default is the measured distance between their effective values.
  rep.lambda_effective = lambda_override.value_or(
      lambda_of(effective_values(a).vhat, effective_values(b).vhat));
  rep.lambda_values = lambda_of(a.values, b.values);

  const AllocationMatrix m = generalized_allocation(a, cfg);
  const AllocationMatrix mp = generalized_allocation(b, cfg);

  for (const auto& def : definitions) {
    if (def == "weak") {
      rep.records.push_back(weak_vs_audit(m, mp, rep.lambda_effective, cfg.ell));
    } else if (def == "ordered") {
      rep.records.push_back(ordered_vs_audit_all(m, mp, rep.lambda_effective, cfg.ell));
    } else if (def == "tv") {
      const double bound = 2.0 * stability_bound(rep.lambda_effective, cfg.ell);
      for (auto& r : tv_vs_audit(m, mp, bound)) rep.records.push_back(std::move(r));
    } else if (def == "hetero") {
      rep.records.push_back(
          heterogeneous_pref_audit(m, mp, a.alpha, b.alpha, rep.lambda_values, cfg.ell));
    } else {
      fail(Errc::invalid_config, "unknown definition: " + def);
    }
  }
  return rep;
}

int cmd_audit(const CommonArgs& args, const std::string& instance_b_path,
              const std::string& definitions_csv, const std::string& format,
              std::optional<double> lambda_override) {
  const auto a = load_instance(args.instance_path);
  const auto b = load_instance(instance_b_path);
  const auto cfg = resolve_config(args);

  std::vector<std::string> defs;
  std::stringstream ss(definitions_csv);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) defs.push_back(tok);
  }
  const auto rep = run_audits(a, b, cfg, defs, lambda_override);

  if (format == "json") {
    emit_json(args.output, fairslot::io::report_to_json(rep));
  } else {
    std::string csv = std::string(fairslot::io::kAuditCsvHeader) + "\n";
    for (const auto& r : rep.records) csv += fairslot::io::audit_record_to_csv(r) + "\n";
    emit(args.output, csv);
  }
  return rep.all_satisfied() ? 0 : 3;
}

int cmd_welfare(const CommonArgs& args) {
  const auto inst = load_instance(args.instance_path);
  const auto cfg = resolve_config(args);
  const auto r = fairslot::evaluate_welfare(inst, cfg);
  emit_json(args.output, json{{"n", inst.n()},
                              {"k", inst.k},
                              {"ell", cfg.ell},
                              {"family", fairslot::family_name(cfg.family)},
                              {"alg", r.alg},
                              {"opt", r.opt},
                              {"ratio", r.ratio},
                              {"bound", r.bound},
                              {"applicable", r.applicable}});
  return 0;
}

// ---------------------------------------------------------------------------
// Sweeps: a grid spec JSON expands to one welfare row per combination and
// trial. Rows are computed into index-addressed slots (parallel workers pull
// an atomic counter), so the output bytes do not depend on scheduling.

struct SweepTask {
  int n, k;
  double ell;
  fairslot::Family family;
  uint64_t seed;
  bool tight;
  double eps;
};

std::string sweep_row(const SweepTask& t) {
  using namespace fairslot;
  AuctionInstance inst;
  if (t.tight) {
    inst = ipa_tight_instance(t.k, t.n, t.eps);
  } else {
    oracles::Rng rng(t.seed);
    inst = oracles::random_instance(rng, t.n, t.k);
  }
  const WelfareResult r = evaluate_welfare(inst, {t.family, t.ell});
  return io::welfare_row_to_csv(t.n, t.k, t.ell, t.family, r);
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
  fairslot::detail::SplitMix64 sm(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return sm.next();
}

int cmd_sweep(const std::string& spec_path, const std::string& out_path) {
  const json spec = parse_json_file(spec_path);
  if (!spec.is_object()) throw CliError{2, {{"error", "InvalidConfig"}, {"detail", "sweep spec must be an object"}}};

  const std::string mode = spec.value("mode", std::string("random"));
  if (mode != "random" && mode != "tight")
    throw CliError{2, {{"error", "InvalidConfig"}, {"detail", "mode must be random or tight"}}};
  const bool tight = mode == "tight";

  std::vector<int> ns, ks;
  std::vector<double> ells;
  std::vector<std::string> families;
  try {
    ns = spec.at("n").get<std::vector<int>>();
    ks = spec.at("k").get<std::vector<int>>();
    ells = tight ? std::vector<double>{1.0} : spec.at("ell").get<std::vector<double>>();
    families = tight ? std::vector<std::string>{"ipa"}
                     : spec.at("family").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw CliError{2, {{"error", "InvalidConfig"}, {"detail", e.what()}}};
  }
  const int trials = spec.value("trials", 1);
  const uint64_t seed = spec.value("seed", 0);
  const double eps = spec.value("eps", 0.5);
  if (trials < 0) throw CliError{2, {{"error", "InvalidConfig"}, {"detail", "trials must be >= 0"}}};

  std::vector<SweepTask> tasks;
  uint64_t index = 0;
  for (int n : ns) {
    for (int k : ks) {
      if (k > n || k < 0) continue;
      if (tight && !(n > 2 * k && k >= 1)) continue;
      for (double ell : ells) {
        for (const auto& fam : families) {
          if (fam != "ipa" && fam != "pa")
            throw CliError{2, {{"error", "InvalidConfig"}, {"detail", "family must be ipa or pa"}}};
          const auto family = fam == "pa" ? fairslot::Family::pa : fairslot::Family::ipa;
          const int reps = tight ? std::min(trials, 1) : trials;
          for (int trial = 0; trial < reps; ++trial) {
            tasks.push_back({n, k, ell, family, mix_seed(seed, index), tight, eps});
            ++index;
          }
        }
      }
    }
  }

  std::vector<std::string> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t t; (t = next.fetch_add(1)) < tasks.size();) rows[t] = sweep_row(tasks[t]);
  };
  const int threads = thread_budget(tasks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string csv = "# " + spec.dump() + "\n" + fairslot::io::kWelfareCsvHeader + "\n";
  for (const auto& row : rows) csv += row + "\n";
  emit(out_path, csv);
  return 0;
}

// ---------------------------------------------------------------------------
// --validate-output: re-parse a file this binary produced and check it
// against the schema it matches.

bool validate_csv(const std::string& content, std::string& kind) {
  std::istringstream in(content);
  std::string line;
  std::string header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = line;
    break;
  }
  size_t columns = 0;
  if (header == fairslot::io::kWelfareCsvHeader) {
    kind = "welfare_csv";
    columns = 9;
  } else if (header == fairslot::io::kAuditCsvHeader) {
    kind = "audit_csv";
    columns = 5;
  } else {
    return false;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t cells = 1;
    for (char c : line) cells += c == ',' ? 1 : 0;
    if (cells != columns) return false;
  }
  return true;
}

bool validate_json_kind(const json& j, std::string& kind) {
  using namespace fairslot;
  auto is_payment = [](const json& p) {
    return p.is_object() && p.contains("advertiser") && p.contains("payment") &&
           p.contains("allocation") && p.contains("pieces") && p.contains("method");
  };
  try {
    if (j.is_array()) {
      for (const auto& p : j) {
        if (!is_payment(p)) return false;
      }
      kind = "payments";
      return true;
    }
    if (!j.is_object()) return false;
    if (j.contains("matrix") && j.contains("cumulative")) {
      io::matrix_from_json(j);
      kind = "matrix";
      return true;
    }
    if (j.contains("weights") && j.contains("assignments")) {
      const auto w = j.at("weights").get<std::vector<double>>();
      double sum = 0.0;
      for (double x : w) sum += x;
      if (std::abs(sum - 1.0) > 1e-9) return false;
      kind = "matching";
      return true;
    }
    if (j.contains("values") && j.contains("alpha")) {
      io::instance_from_json(j);
      kind = "instance";
      return true;
    }
    if (j.contains("records") && j.contains("lambda_effective")) {
      kind = "audit_report";
      return true;
    }
    if (j.contains("assignment") && j.contains("seed")) {
      kind = "sample";
      return true;
    }
    if (j.contains("alg") && j.contains("opt") && j.contains("ratio")) {
      kind = "welfare";
      return true;
    }
    if (is_payment(j)) {
      kind = "payment";
      return true;
    }
    // last: welfare rows also carry family/ell keys
    if (j.contains("family") && j.contains("ell")) {
      io::config_from_json(j);
      kind = "config";
      return true;
    }
  } catch (const Error&) {
    return false;
  } catch (const json::exception&) {
    return false;
  }
  return false;
}

int cmd_validate_output(const std::string& path) {
  const std::string content = read_file(path);
  std::string kind;
  json parsed;
  bool ok = false;
  try {
    parsed = json::parse(content);
    ok = validate_json_kind(parsed, kind);
  } catch (const json::exception&) {
    ok = validate_csv(content, kind);
  }
  if (!ok) throw CliError{2, {{"error", "InvalidOutput"}, {"detail", path}}};
  std::cout << json{{"valid", true}, {"kind", kind}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair multi-slot sponsored-search auctions: allocation, payments, audits"};
  app.require_subcommand(0, 1);

  std::string validate_path;
  app.add_option("--validate-output", validate_path,
                 "validate a JSON/CSV file produced by this binary and exit");

  CommonArgs alloc_args, decomp_args, sample_args, pay_args, audit_args, welfare_args;
  double decomp_tol = 1e-12, sample_tol = 1e-12;
  uint64_t sample_seed = 0;
  int pay_advertiser = 0;
  bool pay_oracle = false;
  std::string audit_b, audit_defs = "weak,ordered,tv,hetero", audit_format = "csv";
  std::string sweep_spec, sweep_out;

  auto* alloc = app.add_subcommand("allocate", "compute the allocation matrix");
  alloc->add_option("-i,--instance", alloc_args.instance_path, "instance JSON")->required();
  add_config_options(alloc, alloc_args);

  auto* decomp = app.add_subcommand("decompose", "decompose the allocation into a matching lottery");
  decomp->add_option("-i,--instance", decomp_args.instance_path, "instance JSON")->required();
  decomp->add_option("--tolerance", decomp_tol, "support tolerance for the decomposition");
  add_config_options(decomp, decomp_args);

  auto* sample = app.add_subcommand("sample", "sample one deterministic assignment");
  sample->add_option("-i,--instance", sample_args.instance_path, "instance JSON")->required();
  sample->add_option("--seed", sample_seed, "sampling seed (default 0)");
  sample->add_option("--tolerance", sample_tol, "support tolerance for the decomposition");
  add_config_options(sample, sample_args);

  auto* pay = app.add_subcommand("pay", "compute truthful per-impression payments");
  pay->add_option("-i,--instance", pay_args.instance_path, "instance JSON")->required();
  auto* adv_opt = pay->add_option("--advertiser", pay_advertiser, "single advertiser index");
  pay->add_flag("--oracle", pay_oracle, "also run the numeric payment oracle and report the delta");
  add_config_options(pay, pay_args);

  auto* audit = app.add_subcommand("audit", "audit stability definitions on an instance pair");
  audit->add_option("instance_a", audit_args.instance_path, "first instance JSON")->required();
  audit->add_option("instance_b", audit_b, "second instance JSON")->required();
  audit->add_option("--definitions", audit_defs, "comma list of weak,ordered,tv,hetero");
  audit->add_option("--format", audit_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  double audit_lambda = 1.0;
  auto* audit_lambda_opt = audit->add_option(
      "--lambda", audit_lambda, "declared user similarity; default: measured effective-value distance");
  add_config_options(audit, audit_args);

  auto* welfare = app.add_subcommand("welfare", "welfare of the mechanism vs the unfair optimum");
  welfare->add_option("-i,--instance", welfare_args.instance_path, "instance JSON")->required();
  add_config_options(welfare, welfare_args);

  auto* sweep = app.add_subcommand("sweep", "run a welfare sweep from a grid spec");
  sweep->add_option("spec", sweep_spec, "sweep spec JSON")->required();
  sweep->add_option("-o,--output", sweep_out, "output CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!validate_path.empty()) return cmd_validate_output(validate_path);
    if (alloc->parsed()) return cmd_allocate(alloc_args);
    if (decomp->parsed()) return cmd_decompose(decomp_args, decomp_tol);
    if (sample->parsed()) return cmd_sample(sample_args, sample_tol, sample_seed);
    if (pay->parsed()) return cmd_pay(pay_args, pay_advertiser, adv_opt->count() > 0, pay_oracle);
    if (audit->parsed()) {
      const std::optional<double> lam =
          audit_lambda_opt->count() > 0 ? std::optional<double>(audit_lambda) : std::nullopt;
      return cmd_audit(audit_args, audit_b, audit_defs, audit_format, lam);
    }
    if (welfare->parsed()) return cmd_welfare(welfare_args);
    if (sweep->parsed()) return cmd_sweep(sweep_spec, sweep_out);
    std::cout << app.help();
    return 0;
  } catch (const CliError& e) {
    std::cerr << e.diagnostic.dump() << "\n";
    return e.exit_code;
  } catch (const fairslot::Error& e) {
    std::cerr << json{{"error", e.name()}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << json{{"error", "ParseError"}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"detail", e.what()}}.dump() << "\n";
    return 1;
  }
}
