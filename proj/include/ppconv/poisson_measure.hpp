#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppconv/error.hpp"
#include "ppconv/rng.hpp"

namespace ppconv {

/// One atom (t, z) of a point measure on R+ x R+, with an optional real mark u.
struct Atom {
  double t = 0.0;
  double z = 0.0;
  std::optional<double> u;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Simple point measure restricted to [0, T] x [0, M].
///
/// Atoms are kept strictly increasing in time, which gives both the
/// lexicographic (t, z) order and simplicity (one atom per time).
class PointMeasureWindow {
 public:
  PointMeasureWindow(double horizon, double mark_bound, bool marked, std::vector<Atom> atoms = {})
      : horizon_(horizon), mark_bound_(mark_bound), marked_(marked), atoms_(std::move(atoms)) {
    validate();
  }

  double horizon() const noexcept { return horizon_; }
  double mark_bound() const noexcept { return mark_bound_; }
  bool marked() const noexcept { return marked_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  friend bool operator==(const PointMeasureWindow&, const PointMeasureWindow&) = default;

 private:
  void validate() const {
    require(std::isfinite(horizon_) && horizon_ >= 0.0, Errc::invalid_argument,
            "window horizon must be finite and nonnegative");
    require(std::isfinite(mark_bound_) && mark_bound_ >= 0.0, Errc::invalid_argument,
            "window mark bound must be finite and nonnegative");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Atom& a = atoms_[i];
      require(a.t >= 0.0 && a.t <= horizon_ && a.z >= 0.0 && a.z <= mark_bound_,
              Errc::invalid_argument,
              "atom " + std::to_string(i) + " lies outside [0,T]x[0,M]");
      require(a.u.has_value() == marked_, Errc::invalid_argument,
              "atom " + std::to_string(i) + " jump mark presence disagrees with window");
      if (i > 0) {
        const Atom& prev = atoms_[i - 1];
        require(prev.t != a.t, Errc::non_simple,
                "atoms " + std::to_string(i - 1) + " and " + std::to_string(i) +
                    " share time " + std::to_string(a.t));
        require(prev.t < a.t, Errc::invalid_argument, "atoms not sorted by time");
      }
    }
  }

  double horizon_;
  double mark_bound_;
  bool marked_;
  std::vector<Atom> atoms_;
};

/// [t0, t1) x [z0, z1]: half-open in time so time tilings partition exactly.
struct Rectangle {
  double t0 = 0.0;
  double t1 = 0.0;
  double z0 = 0.0;
  double z1 = 0.0;

  void validate() const {
    require(0.0 <= t0 && t0 <= t1 && 0.0 <= z0 && z0 <= z1, Errc::invalid_argument,
            "rectangle needs 0 <= t0 <= t1 and 0 <= z0 <= z1");
  }

  bool contains(const Atom& a) const noexcept {
    return a.t >= t0 && a.t < t1 && a.z >= z0 && a.z <= z1;
  }
};

struct AtomMatching {
  std::vector<std::size_t> permutation;  // atom i of the first list <-> permutation[i] of the second
  double max_displacement = 0.0;
};

/// Atoms of a Poisson measure with Lebesgue intensity on [0,T] x [z_lo, z_hi],
/// drawn through the renewal representation: Exponential(z_hi - z_lo)
/// interarrivals, uniform marks, standard normal jump marks when `marked`.
inline std::vector<Atom> sample_strip_atoms(double horizon, double z_lo, double z_hi, bool marked,
                                            const RngStream& stream) {
  std::vector<Atom> atoms;
  const double rate = z_hi - z_lo;
  if (!(rate > 0.0) || !(horizon > 0.0)) return atoms;
  Rng rng(stream);
  double t = 0.0;
  for (;;) {
    const double next = t + rng.exponential(rate);
    if (next > horizon) break;
    // An increment below one ulp of t would collapse two atoms onto one time.
    if (next == t) continue;
    t = next;
    Atom a;
    a.t = t;
    a.z = std::min(z_lo + rate * rng.uniform01(), z_hi);
    if (marked) a.u = rng.normal();
    atoms.push_back(a);
  }
  return atoms;
}

inline PointMeasureWindow sample_window(double horizon, double mark_bound, bool marked,
                                        const RngStream& stream) {
  require(std::isfinite(horizon) && horizon >= 0.0, Errc::invalid_argument,
          "horizon must be nonnegative");
  require(std::isfinite(mark_bound) && mark_bound >= 0.0, Errc::invalid_argument,
          "mark bound must be nonnegative");
  return PointMeasureWindow(horizon, mark_bound, marked,
                            sample_strip_atoms(horizon, 0.0, mark_bound, marked, stream));
}

inline std::size_t count(const PointMeasureWindow& w, const Rectangle& r) {
  r.validate();
  require(r.t1 <= w.horizon() && r.z1 <= w.mark_bound(), Errc::rectangle_out_of_window,
          "rectangle exceeds the sampled window");
  return static_cast<std::size_t>(
      std::count_if(w.atoms().begin(), w.atoms().end(), [&](const Atom& a) { return r.contains(a); }));
}

inline bool is_simple(std::span<const Atom> atoms) {
  std::vector<double> times;
  times.reserve(atoms.size());
  for (const Atom& a : atoms) times.push_back(a.t);
  std::sort(times.begin(), times.end());
  return std::adjacent_find(times.begin(), times.end()) == times.end();
}

inline bool is_simple(const PointMeasureWindow& w) { return is_simple(w.atoms()); }

/// Atoms with t < T' and z <= M'. Restricting to the full window is the
/// identity (an atom sitting exactly at t = T is kept).
inline PointMeasureWindow restrict(const PointMeasureWindow& w, double horizon, double mark_bound) {
  require(horizon >= 0.0 && mark_bound >= 0.0, Errc::invalid_argument,
          "restriction bounds must be nonnegative");
  require(horizon <= w.horizon() && mark_bound <= w.mark_bound(), Errc::enlargement,
          "restriction cannot enlarge the window");
  if (horizon == w.horizon() && mark_bound == w.mark_bound()) return w;
  std::vector<Atom> kept;
  for (const Atom& a : w.atoms())
    if (a.t < horizon && a.z <= mark_bound) kept.push_back(a);
  return PointMeasureWindow(horizon, mark_bound, w.marked(), std::move(kept));
}

/// Merge strips [0,T] x [z_k, z_{k+1}] into one window over [0,T] x [0, mark_bound].
inline PointMeasureWindow superpose(double horizon, double mark_bound, bool marked,
                                    std::span<const std::vector<Atom>> strips) {
  std::vector<Atom> all;
  for (const auto& s : strips) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end(), [](const Atom& a, const Atom& b) {
    return a.t < b.t || (a.t == b.t && a.z < b.z);
  });
  return PointMeasureWindow(horizon, mark_bound, marked, std::move(all));
}

namespace detail {

inline double atom_distance(const Atom& a, const Atom& b) {
  return std::max(std::abs(a.t - b.t), std::abs(a.z - b.z));
}

// Bipartite matching restricted to edges with distance <= threshold.
class ThresholdMatcher {
 public:
  ThresholdMatcher(const std::vector<double>& dist, std::size_t n)
      : dist_(dist), n_(n), row_to_col_(n, npos), col_to_row_(n, npos),
        row_fixed_(n, false), col_fixed_(n, false) {}

  bool edge(std::size_t i, std::size_t j) const { return dist_[i * n_ + j] <= threshold_; }

  bool perfect(double threshold) {
    threshold_ = threshold;
    std::fill(row_to_col_.begin(), row_to_col_.end(), npos);
    std::fill(col_to_row_.begin(), col_to_row_.end(), npos);
    for (std::size_t i = 0; i < n_; ++i) {
      seen_.assign(n_, false);
      if (!augment(i)) return false;
    }
    return true;
  }

  // Starting from a perfect matching at the current threshold, pick for
  // each row in turn the smallest column that still admits a perfect
  // matching of the remaining rows.
  std::vector<std::size_t> lexicographic_min() {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (col_fixed_[j] || !edge(i, j)) continue;
        if (row_to_col_[i] == j) {
          row_fixed_[i] = col_fixed_[j] = true;
          break;
        }
        const std::size_t other_row = col_to_row_[j];
        const std::size_t old_col = row_to_col_[i];
        auto saved_r = row_to_col_;
        auto saved_c = col_to_row_;
        row_to_col_[i] = j;
        col_to_row_[j] = i;
        row_to_col_[other_row] = npos;
        col_to_row_[old_col] = npos;
        row_fixed_[i] = col_fixed_[j] = true;
        seen_.assign(n_, false);
        if (augment(other_row)) break;
        row_to_col_ = std::move(saved_r);
        col_to_row_ = std::move(saved_c);
        row_fixed_[i] = col_fixed_[j] = false;
      }
    }
    return row_to_col_;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool augment(std::size_t row) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (seen_[j] || col_fixed_[j] || !edge(row, j)) continue;
      seen_[j] = true;
      if (col_to_row_[j] == npos || augment(col_to_row_[j])) {
        row_to_col_[row] = j;
        col_to_row_[j] = row;
        return true;
      }
    }
    return false;
  }

  const std::vector<double>& dist_;
  std::size_t n_;
  double threshold_ = 0.0;
  std::vector<std::size_t> row_to_col_;
  std::vector<std::size_t> col_to_row_;
  std::vector<bool> row_fixed_;
  std::vector<bool> col_fixed_;
  std::vector<bool> seen_;
};

}  // namespace detail

/// Bottleneck assignment between two equally sized atom lists under the
/// supremum norm on (t, z). Among optimal bijections the lexicographically
/// smallest permutation is returned.
inline AtomMatching match_atoms(std::span<const Atom> a, std::span<const Atom> b) {
  require(a.size() == b.size(), Errc::count_mismatch,
          "atom counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  const std::size_t n = a.size();
  AtomMatching out;
  if (n == 0) return out;

  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = detail::atom_distance(a[i], b[j]);

  std::vector<double> candidates = dist;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  detail::ThresholdMatcher matcher(dist, n);
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;  // the largest distance always admits a matching
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (matcher.perfect(candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  matcher.perfect(candidates[lo]);
  out.permutation = matcher.lexicographic_min();
  out.max_displacement = candidates[lo];
  return out;
}

inline AtomMatching match_atoms(const PointMeasureWindow& a, const PointMeasureWindow& b) {
  return match_atoms(a.atoms(), b.atoms());
}

}  // namespace ppconv
