#pragma once

#include <stdexcept>
#include <string>

namespace fairslot {

enum class Errc {
  negative_value,
  non_positive_alpha,
  beta_not_sorted,
  beta_out_of_range,
  too_few_advertisers,
  dimension_mismatch,
  lambda_below_one,
  length_mismatch,
  k_exceeds_n,
  infeasible,
  not_substochastic,
  no_perfect_matching,
  slot_out_of_range,
  negative_value_query,
  invalid_h,
  bad_shape,
  invalid_config,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::negative_value: return "NegativeValue";
    case Errc::non_positive_alpha: return "NonPositiveAlpha";
    case Errc::beta_not_sorted: return "BetaNotSorted";
    case Errc::beta_out_of_range: return "BetaOutOfRange";
    case Errc::too_few_advertisers: return "TooFewAdvertisers";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::lambda_below_one: return "LambdaBelowOne";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::k_exceeds_n: return "KExceedsN";
    case Errc::infeasible: return "Infeasible";
    case Errc::not_substochastic: return "NotSubstochastic";
    case Errc::no_perfect_matching: return "NoPerfectMatching";
    case Errc::slot_out_of_range: return "SlotOutOfRange";
    case Errc::negative_value_query: return "NegativeValueQuery";
    case Errc::invalid_h: return "InvalidH";
    case Errc::bad_shape: return "BadShape";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

// Library errors carry a machine-readable code; the CLI maps them to exit 2
// with the code name as diagnostic.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail = {})
      : std::runtime_error(detail.empty() ? std::string(errc_name(code))
                                          : std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  Errc code() const { return code_; }
  const char* name() const { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, std::string detail = {}) {
  throw Error(code, std::move(detail));
}

}  // namespace fairslot
