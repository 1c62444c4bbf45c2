#pragma once

#include <stdexcept>
#include <string>

namespace adaffect {

enum class Errc {
  parse,
  scale_violation,
  degenerate_range,
  empty_rater,
  undefined_kappa,
  unequal_ratings,
  no_pairable_values,
  zero_variance,
  too_short,
  invalid_band,
  missing_baseline,
  rank_zero,
  single_class,
  non_finite,
  dimension_mismatch,
  empty_task,
  length_mismatch,
  insufficient_class_count,
  misaligned_items,
  empty_input,
  infeasible,
  instance_too_large,
  invalid_argument,
  io,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::parse: return "parse error";
    case Errc::scale_violation: return "scale violation";
    case Errc::degenerate_range: return "degenerate range";
    case Errc::empty_rater: return "empty rater";
    case Errc::undefined_kappa: return "undefined kappa";
    case Errc::unequal_ratings: return "unequal ratings per item";
    case Errc::no_pairable_values: return "no pairable values";
    case Errc::zero_variance: return "zero variance";
    case Errc::too_short: return "input too short";
    case Errc::invalid_band: return "invalid band";
    case Errc::missing_baseline: return "missing baseline";
    case Errc::rank_zero: return "rank-0 data";
    case Errc::single_class: return "single class";
    case Errc::non_finite: return "non-finite value";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::empty_task: return "empty task";
    case Errc::length_mismatch: return "length mismatch";
    case Errc::insufficient_class_count: return "insufficient class count";
    case Errc::misaligned_items: return "misaligned items";
    case Errc::empty_input: return "empty input";
    case Errc::infeasible: return "infeasible";
    case Errc::instance_too_large: return "instance too large";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::io: return "i/o error";
  }
  return "error";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace adaffect
