#pragma once

#include <stdexcept>
#include <string>

namespace ppconv {

enum class Errc {
  invalid_argument,
  out_of_domain,
  rectangle_out_of_window,
  enlargement,
  count_mismatch,
  jump_count_mismatch,
  coincident_jumps,
  non_simple,
  mark_bound,
  bound_overflow,
  degenerate_fit,
  empty_sample,
  parse,
};

inline const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::out_of_domain: return "out_of_domain";
    case Errc::rectangle_out_of_window: return "rectangle_out_of_window";
    case Errc::enlargement: return "enlargement";
    case Errc::count_mismatch: return "count_mismatch";
    case Errc::jump_count_mismatch: return "jump_count_mismatch";
    case Errc::coincident_jumps: return "coincident_jumps";
    case Errc::non_simple: return "non_simple";
    case Errc::mark_bound: return "mark_bound";
    case Errc::bound_overflow: return "bound_overflow";
    case Errc::degenerate_fit: return "degenerate_fit";
    case Errc::empty_sample: return "empty_sample";
    case Errc::parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  // Errors caused by bad input rather than by a simulation that went wrong.
  bool is_validation() const noexcept {
    return code_ != Errc::bound_overflow && code_ != Errc::mark_bound &&
           code_ != Errc::degenerate_fit;
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace ppconv
