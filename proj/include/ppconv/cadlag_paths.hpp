#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppconv/error.hpp"

namespace ppconv {

/// Minimal surface every càdlàg path type offers. Left limits are first
/// class because thinning compares marks against x(t-).
template <class P>
concept CadlagPath = requires(const P& p, double t) {
  { p.horizon() } -> std::convertible_to<double>;
  { p.eval(t) } -> std::convertible_to<double>;
  { p.eval_left(t) } -> std::convertible_to<double>;
  { p.sup_norm(t) } -> std::convertible_to<double>;
  { p.range(t) } -> std::convertible_to<std::pair<double, double>>;
  { p.is_continuous_at(t) } -> std::convertible_to<bool>;
};

namespace detail {

inline void check_horizon(double horizon) {
  require(std::isfinite(horizon) && horizon >= 0.0, Errc::invalid_argument,
          "path horizon must be finite and nonnegative");
}

inline void check_eval(double t, double horizon) {
  require(t >= 0.0 && t <= horizon, Errc::out_of_domain,
          "time " + std::to_string(t) + " outside [0, " + std::to_string(horizon) + "]");
}

inline void check_eval_left(double t, double horizon) {
  require(t > 0.0 && t <= horizon, Errc::out_of_domain,
          "left limit at " + std::to_string(t) + " outside (0, " + std::to_string(horizon) + "]");
}

}  // namespace detail

struct Jump {
  double time = 0.0;
  double value = 0.0;

  friend bool operator==(const Jump&, const Jump&) = default;
};

/// Piecewise-constant right-continuous path: `initial` on [0, t_1), then the
/// value of the last jump at or before t.
class StepPath {
 public:
  StepPath(double initial, std::vector<Jump> jumps, double horizon)
      : initial_(initial), jumps_(std::move(jumps)), horizon_(horizon) {
    detail::check_horizon(horizon_);
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
      require(jumps_[i].time > 0.0 && jumps_[i].time <= horizon_, Errc::invalid_argument,
              "jump time outside (0, T]");
      require(i == 0 || jumps_[i - 1].time < jumps_[i].time, Errc::invalid_argument,
              "jump times must be strictly increasing");
    }
  }

  static StepPath constant(double value, double horizon) { return StepPath(value, {}, horizon); }

  /// Counting path 0, 1, 2, ... jumping at the given increasing times.
  static StepPath counting(std::span<const double> times, double horizon) {
    std::vector<Jump> jumps;
    jumps.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
      jumps.push_back({times[i], static_cast<double>(i + 1)});
    return StepPath(0.0, std::move(jumps), horizon);
  }

  double initial_value() const noexcept { return initial_; }
  std::span<const Jump> jumps() const noexcept { return jumps_; }
  std::size_t jump_count() const noexcept { return jumps_.size(); }
  double horizon() const noexcept { return horizon_; }

  std::vector<double> jump_times() const {
    std::vector<double> out;
    out.reserve(jumps_.size());
    for (const Jump& j : jumps_) out.push_back(j.time);
    return out;
  }

  double eval(double t) const {
    detail::check_eval(t, horizon_);
    auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t,
                               [](double x, const Jump& j) { return x < j.time; });
    return it == jumps_.begin() ? initial_ : std::prev(it)->value;
  }

  double eval_left(double t) const {
    detail::check_eval_left(t, horizon_);
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double x) { return j.time < x; });
    return it == jumps_.begin() ? initial_ : std::prev(it)->value;
  }

  std::pair<double, double> range(double upto) const {
    detail::check_eval(upto, horizon_);
    double lo = initial_;
    double hi = initial_;
    for (const Jump& j : jumps_) {
      if (j.time > upto) break;
      lo = std::min(lo, j.value);
      hi = std::max(hi, j.value);
    }
    return {lo, hi};
  }

  double sup_norm(double upto) const {
    auto [lo, hi] = range(upto);
    return std::max(std::abs(lo), std::abs(hi));
  }

  bool is_continuous_at(double t) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double x) { return j.time < x; });
    if (it == jumps_.end() || it->time != t) return true;
    const double before = it == jumps_.begin() ? initial_ : std::prev(it)->value;
    return before == it->value;
  }

  friend bool operator==(const StepPath&, const StepPath&) = default;

 private:
  double initial_;
  std::vector<Jump> jumps_;
  double horizon_;
};

/// Path constant on the cells [k h, (k+1) h), k = 0 .. ceil(T/h) - 1.
/// Cell boundaries are the doubles k * h, and every index lookup below is
/// written against exactly those values.
class GridPath {
 public:
  GridPath(double step, std::vector<double> values, double horizon)
      : step_(step), values_(std::move(values)), horizon_(horizon) {
    require(std::isfinite(step_) && step_ > 0.0, Errc::invalid_argument, "grid step must be positive");
    require(std::isfinite(horizon_) && horizon_ > 0.0, Errc::invalid_argument,
            "grid horizon must be positive");
    require(values_.size() == cell_count(step_, horizon_), Errc::invalid_argument,
            "grid path needs ceil(T/h) = " + std::to_string(cell_count(step_, horizon_)) +
                " values, got " + std::to_string(values_.size()));
  }

  /// Smallest n with n * h >= T.
  static std::size_t cell_count(double step, double horizon) {
    auto n = static_cast<std::size_t>(std::ceil(horizon / step));
    while (n > 0 && static_cast<double>(n - 1) * step >= horizon) --n;
    while (static_cast<double>(n) * step < horizon) ++n;
    return n;
  }

  /// Index k with k h <= t < (k+1) h.
  static std::size_t cell_index(double step, double t) {
    auto k = static_cast<std::size_t>(std::floor(t / step));
    while (k > 0 && static_cast<double>(k) * step > t) --k;
    while (static_cast<double>(k + 1) * step <= t) ++k;
    return k;
  }

  /// Index of the cell that supplies the left limit at t > 0: k h < t <= (k+1) h.
  static std::size_t left_cell_index(double step, double t) {
    if (t <= 0.0) return 0;
    const std::size_t k = cell_index(step, t);
    return static_cast<double>(k) * step == t ? k - 1 : k;
  }

  double step() const noexcept { return step_; }
  std::span<const double> values() const noexcept { return values_; }
  double horizon() const noexcept { return horizon_; }
  double cell_start(std::size_t k) const noexcept { return static_cast<double>(k) * step_; }

  double eval(double t) const {
    detail::check_eval(t, horizon_);
    return values_[std::min(cell_index(step_, t), values_.size() - 1)];
  }

  double eval_left(double t) const {
    detail::check_eval_left(t, horizon_);
    return values_[std::min(left_cell_index(step_, t), values_.size() - 1)];
  }

  std::pair<double, double> range(double upto) const {
    detail::check_eval(upto, horizon_);
    const std::size_t last = std::min(cell_index(step_, upto), values_.size() - 1);
    auto [lo, hi] = std::minmax_element(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return {*lo, *hi};
  }

  double sup_norm(double upto) const {
    auto [lo, hi] = range(upto);
    return std::max(std::abs(lo), std::abs(hi));
  }

  // A grid path is a step path; it jumps exactly where adjacent cells differ.
  bool is_continuous_at(double t) const {
    if (t <= 0.0 || t >= horizon_) return true;
    const std::size_t k = cell_index(step_, t);
    if (cell_start(k) != t || k == 0 || k >= values_.size()) return true;
    return values_[k - 1] == values_[k];
  }

  StepPath to_step() const {
    std::vector<Jump> jumps;
    for (std::size_t k = 1; k < values_.size(); ++k)
      if (values_[k] != values_[k - 1]) jumps.push_back({cell_start(k), values_[k]});
    return StepPath(values_.front(), std::move(jumps), horizon_);
  }

  friend bool operator==(const GridPath&, const GridPath&) = default;

 private:
  double step_;
  std::vector<double> values_;
  double horizon_;
};

/// Continuous piecewise-linear path through knots (t_0 = 0, ..., t_n = T).
class LinearPath {
 public:
  struct Knot {
    double t = 0.0;
    double value = 0.0;
    friend bool operator==(const Knot&, const Knot&) = default;
  };

  explicit LinearPath(std::vector<Knot> knots) : knots_(std::move(knots)) {
    require(!knots_.empty() && knots_.front().t == 0.0, Errc::invalid_argument,
            "linear path must start with a knot at t = 0");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      require(knots_[i - 1].t < knots_[i].t, Errc::invalid_argument,
              "linear path knots must be strictly increasing");
  }

  static LinearPath constant(double value, double horizon) {
    detail::check_horizon(horizon);
    if (horizon == 0.0) return LinearPath({{0.0, value}});
    return LinearPath({{0.0, value}, {horizon, value}});
  }

  std::span<const Knot> knots() const noexcept { return knots_; }
  double horizon() const noexcept { return knots_.back().t; }

  double eval(double t) const {
    detail::check_eval(t, horizon());
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double x, const Knot& k) { return x < k.t; });
    if (it == knots_.end()) return knots_.back().value;
    const Knot& right = *it;
    const Knot& left = *std::prev(it);
    const double w = (t - left.t) / (right.t - left.t);
    return left.value + w * (right.value - left.value);
  }

  double eval_left(double t) const {
    detail::check_eval_left(t, horizon());
    return eval(t);
  }

  std::pair<double, double> range(double upto) const {
    detail::check_eval(upto, horizon());
    double lo = knots_.front().value;
    double hi = lo;
    for (const Knot& k : knots_) {
      if (k.t > upto) break;
      lo = std::min(lo, k.value);
      hi = std::max(hi, k.value);
    }
    const double end = eval(upto);
    return {std::min(lo, end), std::max(hi, end)};
  }

  double sup_norm(double upto) const {
    auto [lo, hi] = range(upto);
    return std::max(std::abs(lo), std::abs(hi));
  }

  bool is_continuous_at(double) const { return true; }

  friend bool operator==(const LinearPath&, const LinearPath&) = default;

 private:
  std::vector<Knot> knots_;
};

/// Path of the form base + amp_i * exp(-rate (t - s_i)) on [s_i, s_{i+1}).
/// Used for exact event-driven states that relax between jumps.
class DecayPath {
 public:
  struct Segment {
    double start = 0.0;
    double amplitude = 0.0;
    friend bool operator==(const Segment&, const Segment&) = default;
  };

  DecayPath(double base, double rate, std::vector<Segment> segments, double horizon)
      : base_(base), rate_(rate), segments_(std::move(segments)), horizon_(horizon) {
    detail::check_horizon(horizon_);
    require(rate_ >= 0.0, Errc::invalid_argument, "decay rate must be nonnegative");
    require(!segments_.empty() && segments_.front().start == 0.0, Errc::invalid_argument,
            "decay path must start with a segment at t = 0");
    for (std::size_t i = 1; i < segments_.size(); ++i)
      require(segments_[i - 1].start < segments_[i].start && segments_[i].start <= horizon_,
              Errc::invalid_argument, "decay segments must be strictly increasing within (0, T]");
  }

  /// Value `dt` after the start of a segment; the one formula shared by
  /// simulators and by evaluation so thinning decisions agree bitwise.
  static double value_at(double base, double rate, double amplitude, double dt) noexcept {
    return base + amplitude * std::exp(-rate * dt);
  }

  double base() const noexcept { return base_; }
  double rate() const noexcept { return rate_; }
  std::span<const Segment> segments() const noexcept { return segments_; }
  double horizon() const noexcept { return horizon_; }

  double eval(double t) const {
    detail::check_eval(t, horizon_);
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double x, const Segment& s) { return x < s.start; });
    const Segment& s = *std::prev(it);
    return value_at(base_, rate_, s.amplitude, t - s.start);
  }

  double eval_left(double t) const {
    detail::check_eval_left(t, horizon_);
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double x) { return s.start < x; });
    const Segment& s = *std::prev(it);
    return value_at(base_, rate_, s.amplitude, t - s.start);
  }

  // Each segment is monotone, so extremes sit at segment ends.
  std::pair<double, double> range(double upto) const {
    detail::check_eval(upto, horizon_);
    double lo = segments_.front().amplitude + base_;
    double hi = lo;
    for (std::size_t i = 0; i < segments_.size() && segments_[i].start <= upto; ++i) {
      const double end = i + 1 < segments_.size() && segments_[i + 1].start <= upto
                             ? segments_[i + 1].start
                             : upto;
      const double a = value_at(base_, rate_, segments_[i].amplitude, 0.0);
      const double b = value_at(base_, rate_, segments_[i].amplitude, end - segments_[i].start);
      lo = std::min({lo, a, b});
      hi = std::max({hi, a, b});
    }
    return {lo, hi};
  }

  double sup_norm(double upto) const {
    auto [lo, hi] = range(upto);
    return std::max(std::abs(lo), std::abs(hi));
  }

  bool is_continuous_at(double t) const {
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double x) { return s.start < x; });
    if (it == segments_.end() || it->start != t || it == segments_.begin()) return true;
    const Segment& prev = *std::prev(it);
    return value_at(base_, rate_, prev.amplitude, t - prev.start) ==
           value_at(base_, rate_, it->amplitude, 0.0);
  }

  friend bool operator==(const DecayPath&, const DecayPath&) = default;

 private:
  double base_;
  double rate_;
  std::vector<Segment> segments_;
  double horizon_;
};

/// Continuous increasing piecewise-linear bijection of [0, T].
class TimeChange {
 public:
  struct Knot {
    double s = 0.0;
    double image = 0.0;
    friend bool operator==(const Knot&, const Knot&) = default;
  };

  explicit TimeChange(std::vector<Knot> knots) : knots_(std::move(knots)) {
    require(!knots_.empty() && knots_.front().s == 0.0 && knots_.front().image == 0.0,
            Errc::invalid_argument, "time change must fix 0");
    require(knots_.back().s == knots_.back().image, Errc::invalid_argument,
            "time change must fix the horizon");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      require(knots_[i - 1].s < knots_[i].s && knots_[i - 1].image < knots_[i].image,
              Errc::invalid_argument, "time change must be strictly increasing");
  }

  static TimeChange identity(double horizon) {
    if (horizon == 0.0) return TimeChange({{0.0, 0.0}});
    return TimeChange({{0.0, 0.0}, {horizon, horizon}});
  }

  std::span<const Knot> knots() const noexcept { return knots_; }
  double horizon() const noexcept { return knots_.back().s; }

  double operator()(double s) const {
    detail::check_eval(s, horizon());
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                               [](double x, const Knot& k) { return x < k.s; });
    if (it == knots_.end()) return knots_.back().image;
    const Knot& right = *it;
    const Knot& left = *std::prev(it);
    return left.image + (s - left.s) * (right.image - left.image) / (right.s - left.s);
  }

  TimeChange inverse() const {
    std::vector<Knot> inv;
    inv.reserve(knots_.size());
    for (const Knot& k : knots_) inv.push_back({k.image, k.s});
    return TimeChange(std::move(inv));
  }

  /// ||lambda - Id||_inf; attained at a knot for piecewise-linear maps.
  double distance_to_identity() const {
    double d = 0.0;
    for (const Knot& k : knots_) d = std::max(d, std::abs(k.image - k.s));
    return d;
  }

  friend bool operator==(const TimeChange&, const TimeChange&) = default;

 private:
  std::vector<Knot> knots_;
};

/// g o lambda for a step path g: the jump at t_i moves to lambda^{-1}(t_i).
inline StepPath compose(const StepPath& g, const TimeChange& lambda) {
  require(g.horizon() == lambda.horizon(), Errc::invalid_argument,
          "path and time change must share a horizon");
  const TimeChange inv = lambda.inverse();
  std::vector<Jump> jumps;
  jumps.reserve(g.jump_count());
  for (const Jump& j : g.jumps()) jumps.push_back({inv(j.time), j.value});
  return StepPath(g.initial_value(), std::move(jumps), g.horizon());
}

/// Components of an R^k valued step path; all share one horizon.
class PathVector {
 public:
  explicit PathVector(std::vector<StepPath> components) : components_(std::move(components)) {
    require(!components_.empty(), Errc::invalid_argument, "path vector needs at least one component");
    for (const StepPath& p : components_)
      require(p.horizon() == components_.front().horizon(), Errc::invalid_argument,
              "path vector components must share a horizon");
  }

  std::span<const StepPath> components() const noexcept { return components_; }
  const StepPath& operator[](std::size_t i) const { return components_.at(i); }
  std::size_t size() const noexcept { return components_.size(); }
  double horizon() const noexcept { return components_.front().horizon(); }

  friend bool operator==(const PathVector&, const PathVector&) = default;

 private:
  std::vector<StepPath> components_;
};

struct SkorohodBound {
  double distance = 0.0;
  TimeChange time_change = TimeChange::identity(0.0);
};

namespace detail {

struct TaggedJump {
  double time;
  std::size_t component;
  double value;
};

inline std::vector<TaggedJump> merged_jumps(const PathVector& g, const char* which) {
  std::vector<TaggedJump> out;
  for (std::size_t c = 0; c < g.size(); ++c)
    for (const Jump& j : g[c].jumps()) out.push_back({j.time, c, j.value});
  std::sort(out.begin(), out.end(),
            [](const TaggedJump& a, const TaggedJump& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < out.size(); ++i)
    require(out[i - 1].time != out[i].time, Errc::coincident_jumps,
            std::string(which) + " has two components jumping at " + std::to_string(out[i].time));
  return out;
}

}  // namespace detail

/// Upper bound on the J1 distance between step vectors g1 and g2.
///
/// The merged jump times s_1 < ... < s_n of g1 are sent to the merged jump
/// times of g2 by a piecewise-linear lambda, so g2 o lambda jumps exactly
/// where g1 does. The bound is max(||lambda - Id||, ||g1 - g2 o lambda||),
/// both computed exactly.
inline SkorohodBound skorohod_upper_distance(const PathVector& g1, const PathVector& g2) {
  require(g1.size() == g2.size(), Errc::invalid_argument, "path vectors differ in dimension");
  require(g1.horizon() == g2.horizon(), Errc::invalid_argument, "path vectors differ in horizon");
  const double horizon = g1.horizon();
  for (std::size_t c = 0; c < g1.size(); ++c)
    require(g1[c].jump_count() == g2[c].jump_count(), Errc::jump_count_mismatch,
            "component " + std::to_string(c) + " has " + std::to_string(g1[c].jump_count()) +
                " vs " + std::to_string(g2[c].jump_count()) + " jumps");

  const auto s1 = detail::merged_jumps(g1, "first path vector");
  const auto s2 = detail::merged_jumps(g2, "second path vector");

  std::vector<TimeChange::Knot> knots{{0.0, 0.0}};
  double time_gap = 0.0;
  for (std::size_t r = 0; r < s1.size(); ++r) {
    require((s1[r].time == horizon) == (s2[r].time == horizon), Errc::invalid_argument,
            "a jump at the horizon has no counterpart at the horizon");
    if (s1[r].time < horizon) knots.push_back({s1[r].time, s2[r].time});
    time_gap = std::max(time_gap, std::abs(s1[r].time - s2[r].time));
  }
  if (horizon > 0.0) knots.push_back({horizon, horizon});

  std::vector<double> v1;
  std::vector<double> v2;
  for (const StepPath& p : g1.components()) v1.push_back(p.initial_value());
  for (const StepPath& p : g2.components()) v2.push_back(p.initial_value());
  auto value_gap = [&] {
    double d = 0.0;
    for (std::size_t c = 0; c < v1.size(); ++c) d = std::max(d, std::abs(v1[c] - v2[c]));
    return d;
  };
  double gap = value_gap();
  for (std::size_t r = 0; r < s1.size(); ++r) {
    v1[s1[r].component] = s1[r].value;
    v2[s2[r].component] = s2[r].value;
    gap = std::max(gap, value_gap());
  }
  return {std::max(time_gap, gap), TimeChange(std::move(knots))};
}

inline SkorohodBound skorohod_upper_distance(const StepPath& g1, const StepPath& g2) {
  return skorohod_upper_distance(PathVector({g1}), PathVector({g2}));
}

/// sup over [0, T'] of |p1 - p2|, exact over the merged breakpoints.
inline double uniform_distance(const StepPath& p1, const StepPath& p2, double upto) {
  require(p1.horizon() == p2.horizon(), Errc::invalid_argument, "paths must share a horizon");
  detail::check_eval(upto, p1.horizon());
  double d = std::abs(p1.initial_value() - p2.initial_value());
  auto a = p1.jumps();
  auto b = p2.jumps();
  std::size_t i = 0;
  std::size_t j = 0;
  double va = p1.initial_value();
  double vb = p2.initial_value();
  while (i < a.size() || j < b.size()) {
    const double ta = i < a.size() ? a[i].time : INFINITY;
    const double tb = j < b.size() ? b[j].time : INFINITY;
    const double t = std::min(ta, tb);
    if (t > upto) break;
    if (ta == t) va = a[i++].value;
    if (tb == t) vb = b[j++].value;
    d = std::max(d, std::abs(va - vb));
  }
  return d;
}

inline double uniform_distance(const GridPath& p1, const GridPath& p2, double upto) {
  return uniform_distance(p1.to_step(), p2.to_step(), upto);
}

}  // namespace ppconv
