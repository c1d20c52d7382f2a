#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ppconv/error.hpp"

namespace ppconv {

namespace detail {

inline double parse_number(std::string_view s, std::string_view what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v), Errc::parse,
          std::string(what) + ": '" + std::string(s) + "' is not a number");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::pair<std::string_view, std::string_view> split_descriptor(std::string_view s,
                                                                      std::string_view what) {
  const std::size_t colon = s.find(':');
  require(colon != std::string_view::npos, Errc::parse,
          std::string(what) + " descriptor '" + std::string(s) + "' lacks a ':'");
  return {s.substr(0, colon), s.substr(colon + 1)};
}

}  // namespace detail

/// Interaction kernel K on R+.
class Kernel {
 public:
  enum class Kind { exponential, power, tabulated };

  static Kernel exponential(double beta) {
    require(beta >= 0.0, Errc::invalid_argument, "exponential kernel rate must be nonnegative");
    return Kernel(Kind::exponential, beta, {});
  }

  static Kernel power(double gamma) {
    require(gamma > 0.0, Errc::invalid_argument, "power kernel exponent must be positive");
    return Kernel(Kind::power, gamma, {});
  }

  /// Linear interpolation through (t, K(t)) points, constant beyond the last.
  static Kernel tabulated(std::vector<std::pair<double, double>> points) {
    require(!points.empty() && points.front().first == 0.0, Errc::invalid_argument,
            "tabulated kernel must start at t = 0");
    for (std::size_t i = 1; i < points.size(); ++i)
      require(points[i - 1].first < points[i].first, Errc::invalid_argument,
              "tabulated kernel abscissae must increase");
    return Kernel(Kind::tabulated, 0.0, std::move(points));
  }

  /// `exp:beta`, `pow:gamma`, or `table:t0:k0,t1:k1,...`.
  static Kernel parse(std::string_view text) {
    auto [kind, args] = detail::split_descriptor(text, "kernel");
    if (kind == "exp") return exponential(detail::parse_number(args, "kernel exp rate"));
    if (kind == "pow") return power(detail::parse_number(args, "kernel pow exponent"));
    if (kind == "table") {
      std::vector<std::pair<double, double>> pts;
      for (auto item : detail::split(args, ',')) {
        auto xy = detail::split(item, ':');
        require(xy.size() == 2, Errc::parse, "kernel table entries are t:value pairs");
        pts.emplace_back(detail::parse_number(xy[0], "kernel table t"),
                         detail::parse_number(xy[1], "kernel table value"));
      }
      return tabulated(std::move(pts));
    }
    fail(Errc::parse, "unknown kernel kind '" + std::string(kind) + "'");
  }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::exponential: return std::exp(-param_ * t);
      case Kind::power: return std::pow(t, param_);
      case Kind::tabulated: {
        auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                   [](double x, const auto& p) { return x < p.first; });
        if (it == table_.end()) return table_.back().second;
        if (it == table_.begin()) return table_.front().second;
        const auto& [t1, k1] = *it;
        const auto& [t0, k0] = *std::prev(it);
        return k0 + (t - t0) * (k1 - k0) / (t1 - t0);
      }
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::exponential: return "exp:" + format(param_);
      case Kind::power: return "pow:" + format(param_);
      case Kind::tabulated: {
        std::string s = "table:";
        for (std::size_t i = 0; i < table_.size(); ++i) {
          if (i) s += ',';
          s += format(table_[i].first) + ":" + format(table_[i].second);
        }
        return s;
      }
    }
    return {};
  }

 private:
  Kernel(Kind kind, double param, std::vector<std::pair<double, double>> table)
      : kind_(kind), param_(param), table_(std::move(table)) {}

  static std::string format(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

  Kind kind_;
  double param_;
  std::vector<std::pair<double, double>> table_;
};

/// Nonnegative Lipschitz rate function f: R -> R+.
class RateFunction {
 public:
  enum class Kind { affine, constant, sigmoid };

  /// f(x) = max(a + b x, 0).
  static RateFunction affine(double a, double b) { return RateFunction(Kind::affine, a, b); }

  static RateFunction constant(double c) {
    require(c >= 0.0, Errc::invalid_argument, "constant rate must be nonnegative");
    return RateFunction(Kind::constant, c, 0.0);
  }

  /// f(x) = c / (1 + exp(-s x)).
  static RateFunction sigmoid(double c, double s) {
    require(c >= 0.0, Errc::invalid_argument, "sigmoid scale must be nonnegative");
    return RateFunction(Kind::sigmoid, c, s);
  }

  /// `affine:a,b`, `const:c`, or `sigmoid:c,s`.
  static RateFunction parse(std::string_view text) {
    auto [kind, args] = detail::split_descriptor(text, "rate function");
    auto parts = detail::split(args, ',');
    if (kind == "const") {
      require(parts.size() == 1, Errc::parse, "const takes one argument");
      return constant(detail::parse_number(parts[0], "const value"));
    }
    require(parts.size() == 2, Errc::parse, std::string(kind) + " takes two arguments");
    const double p = detail::parse_number(parts[0], "rate function argument");
    const double q = detail::parse_number(parts[1], "rate function argument");
    if (kind == "affine") return affine(p, q);
    if (kind == "sigmoid") return sigmoid(p, q);
    fail(Errc::parse, "unknown rate function kind '" + std::string(kind) + "'");
  }

  Kind kind() const noexcept { return kind_; }
  bool is_constant() const noexcept {
    return kind_ == Kind::constant || (kind_ == Kind::affine && q_ == 0.0) ||
           (kind_ == Kind::sigmoid && q_ == 0.0);
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::affine: return std::max(p_ + q_ * x, 0.0);
      case Kind::constant: return p_;
      case Kind::sigmoid: return p_ / (1.0 + std::exp(-q_ * x));
    }
    return 0.0;
  }

  std::string describe() const {
    auto fmt = [](double v) {
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, res.ptr);
    };
    switch (kind_) {
      case Kind::affine: return "affine:" + fmt(p_) + "," + fmt(q_);
      case Kind::constant: return "const:" + fmt(p_);
      case Kind::sigmoid: return "sigmoid:" + fmt(p_) + "," + fmt(q_);
    }
    return {};
  }

 private:
  RateFunction(Kind kind, double p, double q) : kind_(kind), p_(p), q_(q) {}

  Kind kind_;
  double p_;
  double q_;
};

}  // namespace ppconv
