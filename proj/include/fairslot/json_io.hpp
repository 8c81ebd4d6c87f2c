#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairslot/core.hpp"
#include "fairslot/errors.hpp"
#include "fairslot/fairness_audit.hpp"
#include "fairslot/feasibility.hpp"
#include "fairslot/position.hpp"
#include "fairslot/welfare.hpp"

namespace fairslot::io {

using nlohmann::json;

// 17 significant digits: doubles round-trip exactly through the CSV.
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json instance_to_json(const AuctionInstance& inst) {
  return json{{"values", inst.values}, {"alpha", inst.alpha}, {"beta", inst.beta}, {"k", inst.k}};
}

inline AuctionInstance instance_from_json(const json& j) {
  if (!j.is_object() || !j.contains("values") || !j.contains("alpha") || !j.contains("beta") ||
      !j.contains("k"))
    fail(Errc::invalid_config, "instance needs values, alpha, beta, k");
  AuctionInstance inst;
  inst.values = j.at("values").get<std::vector<double>>();
  inst.alpha = j.at("alpha").get<std::vector<double>>();
  inst.beta = j.at("beta").get<std::vector<double>>();
  inst.k = j.at("k").get<int>();
  return validate_instance(std::move(inst));
}

inline json config_to_json(const MechanismConfig& cfg) {
  return json{{"family", family_name(cfg.family)}, {"ell", cfg.ell}};
}

inline MechanismConfig config_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.contains("ell"))
    fail(Errc::invalid_config, "config needs family and ell");
  MechanismConfig cfg;
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "ipa")
    cfg.family = Family::ipa;
  else if (fam == "pa")
    cfg.family = Family::pa;
  else
    fail(Errc::invalid_config, "family must be \"ipa\" or \"pa\"");
  cfg.ell = j.at("ell").get<double>();
  return validate_config(cfg);
}

inline json matrix_to_json(const AllocationMatrix& m) {
  return json{{"matrix", m.m}, {"cumulative", m.cumulative}};
}

inline AllocationMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("matrix") || !j.contains("cumulative"))
    fail(Errc::invalid_config, "matrix file needs matrix and cumulative");
  AllocationMatrix m;
  m.m = j.at("matrix").get<std::vector<std::vector<double>>>();
  m.cumulative = j.at("cumulative").get<std::vector<std::vector<double>>>();
  const size_t k = m.m.empty() ? 0 : m.m[0].size();
  if (m.cumulative.size() != k + 1) fail(Errc::invalid_config, "cumulative must hold k+1 vectors");
  for (const auto& row : m.m) {
    if (row.size() != k) fail(Errc::invalid_config, "matrix rows must have equal length");
  }
  for (const auto& c : m.cumulative) {
    if (c.size() != m.m.size()) fail(Errc::invalid_config, "cumulative vectors must have length n");
  }
  return m;
}

// Dummy positions (>= k) are reported as -1: the ad is not shown.
inline json matching_to_json(const MatchingDistribution& dist) {
  json assignments = json::array();
  json weights = json::array();
  for (const auto& e : dist.entries) {
    weights.push_back(e.weight);
    json row = json::array();
    for (int pos : e.assignment) row.push_back(pos < dist.k ? pos : -1);
    assignments.push_back(std::move(row));
  }
  return json{{"weights", std::move(weights)}, {"assignments", std::move(assignments)}};
}

inline json witness_to_json(const AuditWitness& w) {
  json j = json::object();
  if (w.i >= 0) j["i"] = w.i;
  if (w.j >= 0) j["j"] = w.j;
  if (w.p >= 0) j["p"] = w.p;
  if (!w.subset.empty()) j["subset"] = w.subset;
  return j;
}

inline json audit_record_to_json(const AuditRecord& r) {
  return json{{"definition", r.metric},
              {"measured", r.measured},
              {"bound", r.bound},
              {"satisfied", r.satisfied},
              {"witness", witness_to_json(r.witness)}};
}

inline json report_to_json(const FairnessReport& rep) {
  json records = json::array();
  for (const auto& r : rep.records) records.push_back(audit_record_to_json(r));
  return json{{"lambda_effective", rep.lambda_effective},
              {"lambda_values", rep.lambda_values},
              {"records", std::move(records)}};
}

inline std::string witness_to_csv(const AuditWitness& w) {
  std::string s;
  auto add = [&s](const std::string& part) {
    if (!s.empty()) s += ';';
    s += part;
  };
  if (w.i >= 0) add("i=" + std::to_string(w.i));
  if (w.j >= 0) add("j=" + std::to_string(w.j));
  if (w.p >= 0) add("p=" + std::to_string(w.p));
  if (!w.subset.empty()) {
    std::string sub = "S={";
    for (size_t t = 0; t < w.subset.size(); ++t) {
      if (t) sub += '|';
      sub += std::to_string(w.subset[t]);
    }
    sub += '}';
    add(sub);
  }
  return s.empty() ? "-" : s;
}

inline const char* kAuditCsvHeader = "definition,witness,measured,bound,satisfied";

inline std::string audit_record_to_csv(const AuditRecord& r) {
  return r.metric + "," + witness_to_csv(r.witness) + "," + fmt17(r.measured) + "," +
         fmt17(r.bound) + "," + (r.satisfied ? "true" : "false");
}

inline const char* kWelfareCsvHeader = "n,k,ell,family,alg,opt,ratio,bound,applicable";

inline std::string welfare_row_to_csv(int n, int k, double ell, Family family,
                                      const WelfareResult& r) {
  return std::to_string(n) + "," + std::to_string(k) + "," + fmt17(ell) + "," +
         family_name(family) + "," + fmt17(r.alg) + "," + fmt17(r.opt) + "," + fmt17(r.ratio) +
         "," + fmt17(r.bound) + "," + (r.applicable ? "true" : "false");
}

}  // namespace fairslot::io
