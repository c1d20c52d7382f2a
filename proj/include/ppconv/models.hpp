#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "ppconv/cadlag_paths.hpp"
#include "ppconv/error.hpp"
#include "ppconv/kernels.hpp"
#include "ppconv/poisson_measure.hpp"
#include "ppconv/rng.hpp"
#include "ppconv/thinning.hpp"

namespace ppconv {

// Child keys under a simulation's seed. Gaussian noise and Poisson windows
// never share a stream, which makes a limit intensity independent of the
// measures it thins.
namespace stream_key {
inline constexpr std::uint64_t particle_measures = 1;
inline constexpr std::uint64_t gaussian = 2;
inline constexpr std::uint64_t limit_measures = 3;
}  // namespace stream_key

/// Poisson measure on [0,T] x R+ revealed in horizontal strips of fixed
/// height. Strip k covers marks [kS, (k+1)S] and has its own stream, so
/// raising the bound adds atoms above the old bound and never disturbs the
/// ones below it.
class StripMeasure {
 public:
  StripMeasure(double horizon, double strip_height, bool marked, const RngStream& stream)
      : horizon_(horizon), height_(strip_height), marked_(marked), stream_(stream) {
    require(strip_height > 0.0, Errc::invalid_argument, "strip height must be positive");
  }

  /// Grows until the revealed region covers marks up to `bound`. Returns
  /// the number of strips added.
  std::size_t cover(double bound) {
    std::size_t added = 0;
    while (this->bound() < bound) {
      const auto k = static_cast<double>(strips_.size());
      strips_.push_back(sample_strip_atoms(horizon_, k * height_, (k + 1.0) * height_, marked_,
                                           stream_.child(strips_.size())));
      ++added;
    }
    return added;
  }

  double bound() const noexcept { return static_cast<double>(strips_.size()) * height_; }
  std::size_t strip_count() const noexcept { return strips_.size(); }
  const std::vector<Atom>& strip(std::size_t k) const { return strips_.at(k); }

  PointMeasureWindow window() const { return superpose(horizon_, bound(), marked_, strips_); }

 private:
  double horizon_;
  double height_;
  bool marked_;
  RngStream stream_;
  std::vector<std::vector<Atom>> strips_;
};

struct SimulationDiagnostics {
  std::size_t candidate_atoms = 0;
  std::size_t accepted_events = 0;
  std::size_t rejected_atoms = 0;
  double mark_bound = 0.0;  // largest revealed mark bound
};

struct SimulationOutput {
  Intensity state_path;       // X^N, or the limit state
  Intensity intensity_path;   // intensity thinning the observed measures
  PathVector counting_paths;  // Z^{N,i} for the observed i
  std::vector<PointMeasureWindow> windows_used;  // measures of the observed processes
  SimulationDiagnostics diagnostics;

  // Coupled limit objects driven by the same windows (Hawkes model).
  std::optional<Intensity> limit_state_path;
  std::optional<Intensity> limit_intensity_path;
  std::optional<PathVector> limit_counting_paths;

  // Time-rescaled objects (Volterra model).
  std::optional<Intensity> rescaled_state_path;
  std::optional<PathVector> rescaled_counting_paths;
};

// ---------------------------------------------------------------------------
// Mean-field diffusive model
// ---------------------------------------------------------------------------

struct MeanFieldDiffusiveConfig {
  double alpha = 1.0;
  int particles = 1;
  double horizon = 1.0;
  int observed = 1;
  RngStream seed{};
  double strip_height = 1.0;

  void validate() const {
    require(alpha > 0.0, Errc::invalid_argument, "alpha must be positive");
    require(particles >= 1, Errc::invalid_argument, "N must be >= 1");
    require(observed >= 1 && observed <= particles, Errc::invalid_argument,
            "n_obs must lie in [1, N]");
    require(std::isfinite(horizon) && horizon >= 0.0, Errc::invalid_argument,
            "T must be nonnegative");
    require(strip_height > 0.0, Errc::invalid_argument, "strip height must be positive");
  }
};

/// Exact event-driven simulation of the N-particle system
///   dX = -alpha X dt + N^{-1/2} sum_j u 1{z <= 1 + X_{t-}^2} dpi^j(t, z, u).
/// Between events |X| decays, so 1 + X^2 just after an event bounds the
/// intensity until the next one.
inline SimulationOutput simulate_meanfield_prelimit(const MeanFieldDiffusiveConfig& c) {
  c.validate();
  const double horizon = c.horizon;
  const double jump_scale = 1.0 / std::sqrt(static_cast<double>(c.particles));
  const double x_rate = c.alpha;
  const double y_rate = 2.0 * c.alpha;

  std::vector<StripMeasure> measures;
  measures.reserve(static_cast<std::size_t>(c.particles));
  for (int j = 0; j < c.particles; ++j)
    measures.emplace_back(horizon, c.strip_height, true,
                          c.seed.child(stream_key::particle_measures).child(static_cast<std::uint64_t>(j)));

  struct Cursor {
    double t;
    std::uint32_t particle;
    std::uint32_t strip;
    std::size_t index;
    bool operator>(const Cursor& o) const {
      if (t != o.t) return t > o.t;
      if (particle != o.particle) return particle > o.particle;
      return strip > o.strip;
    }
  };
  std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> queue;

  auto push_from = [&](std::uint32_t j, std::uint32_t s, double after) {
    const auto& atoms = measures[j].strip(s);
    auto it = std::upper_bound(atoms.begin(), atoms.end(), after,
                               [](double x, const Atom& a) { return x < a.t; });
    if (it != atoms.end())
      queue.push({it->t, j, s, static_cast<std::size_t>(it - atoms.begin())});
  };
  auto cover_all = [&](double bound, double after) {
    for (std::uint32_t j = 0; j < measures.size(); ++j) {
      const std::size_t before = measures[j].strip_count();
      measures[j].cover(bound);
      for (auto s = static_cast<std::uint32_t>(before); s < measures[j].strip_count(); ++s)
        push_from(j, s, after);
    }
  };

  SimulationDiagnostics diag;
  double x_last = 0.0;
  double t_last = 0.0;
  std::vector<DecayPath::Segment> x_segments{{0.0, 0.0}};
  std::vector<DecayPath::Segment> y_segments{{0.0, 0.0}};
  std::vector<std::vector<double>> events(static_cast<std::size_t>(c.observed));

  cover_all(1.0, -1.0);
  while (!queue.empty()) {
    const Cursor cur = queue.top();
    queue.pop();
    const Atom& atom = measures[cur.particle].strip(cur.strip)[cur.index];
    ++diag.candidate_atoms;
    const double dt = atom.t - t_last;
    const double amplitude = x_last * x_last;
    const double intensity = DecayPath::value_at(1.0, y_rate, amplitude, dt);
    if (atom.z <= intensity) {
      ++diag.accepted_events;
      x_last = DecayPath::value_at(0.0, x_rate, x_last, dt) + *atom.u * jump_scale;
      t_last = atom.t;
      x_segments.push_back({t_last, x_last});
      y_segments.push_back({t_last, x_last * x_last});
      if (cur.particle < events.size()) events[cur.particle].push_back(t_last);
      cover_all(DecayPath::value_at(1.0, y_rate, x_last * x_last, 0.0), t_last);
    } else {
      ++diag.rejected_atoms;
    }
    const auto& atoms = measures[cur.particle].strip(cur.strip);
    if (cur.index + 1 < atoms.size())
      queue.push({atoms[cur.index + 1].t, cur.particle, cur.strip, cur.index + 1});
  }

  std::vector<StepPath> counting;
  std::vector<PointMeasureWindow> windows;
  for (std::size_t i = 0; i < events.size(); ++i) {
    counting.push_back(StepPath::counting(events[i], horizon));
    windows.push_back(measures[i].window());
  }
  diag.mark_bound = measures.front().bound();
  return SimulationOutput{DecayPath(0.0, x_rate, std::move(x_segments), horizon),
                          DecayPath(1.0, y_rate, std::move(y_segments), horizon),
                          PathVector(std::move(counting)),
                          std::move(windows),
                          diag,
                          {}, {}, {}, {}, {}};
}

struct MeanFieldLimitConfig {
  double alpha = 1.0;
  double horizon = 1.0;
  double step = 0.01;
  int observed = 1;
  RngStream seed{};
  double noise_scale = 1.0;  // 0 forces every Gaussian draw to zero

  void validate() const {
    require(alpha > 0.0, Errc::invalid_argument, "alpha must be positive");
    require(std::isfinite(horizon) && horizon > 0.0, Errc::invalid_argument,
            "limit simulation needs T > 0");
    require(step > 0.0, Errc::invalid_argument, "grid step must be positive");
    require(observed >= 1, Errc::invalid_argument, "n_obs must be >= 1");
  }
};

/// Euler-Maruyama for dX = -alpha X dt + sqrt(1 + X^2) dW on the grid, then
/// thinning of fresh windows by the grid intensity 1 + X^2. The window bound
/// is read off the finished path, which keeps windows independent of it.
inline SimulationOutput simulate_meanfield_limit(const MeanFieldLimitConfig& c) {
  c.validate();
  const std::size_t n = GridPath::cell_count(c.step, c.horizon);
  const double sqrt_h = std::sqrt(c.step);
  Rng noise(c.seed.child(stream_key::gaussian));

  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double xi = noise.normal() * c.noise_scale;
    x[k + 1] = x[k] - c.alpha * x[k] * c.step + std::sqrt(1.0 + x[k] * x[k]) * sqrt_h * xi;
  }
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = 1.0 + x[k] * x[k];
  const double bound = *std::max_element(y.begin(), y.end());

  GridPath intensity(c.step, std::move(y), c.horizon);
  std::vector<StepPath> counting;
  std::vector<PointMeasureWindow> windows;
  SimulationDiagnostics diag;
  diag.mark_bound = bound;
  for (int i = 0; i < c.observed; ++i) {
    windows.push_back(sample_window(
        c.horizon, bound, false,
        c.seed.child(stream_key::limit_measures).child(static_cast<std::uint64_t>(i))));
    counting.push_back(thin(intensity, windows.back(), c.horizon));
    diag.candidate_atoms += windows.back().size();
    diag.accepted_events += counting.back().jump_count();
  }
  diag.rejected_atoms = diag.candidate_atoms - diag.accepted_events;
  return SimulationOutput{GridPath(c.step, std::move(x), c.horizon),
                          std::move(intensity),
                          PathVector(std::move(counting)),
                          std::move(windows),
                          diag,
                          {}, {}, {}, {}, {}};
}

// ---------------------------------------------------------------------------
// Volterra square-root model
// ---------------------------------------------------------------------------

struct VolterraConfig {
  double gamma = 1.0;
  int scale = 1;           // N: time is rescaled by N, space by 1/N
  double horizon = 1.0;    // horizon of the rescaled process
  double baseline = 1.0;   // mu; mu = 0 gives the absorbing zero system
  double step = 0.01;      // grid step of the rescaled process
  RngStream seed{};
  bool feedback = true;    // false freezes the intensity at mu
  double max_mark_bound = 1e6;
  double strip_height = 1.0;

  void validate() const {
    require(gamma > 0.0, Errc::invalid_argument, "gamma must be positive");
    require(scale >= 1, Errc::invalid_argument, "N must be >= 1");
    require(std::isfinite(horizon) && horizon > 0.0, Errc::invalid_argument, "T must be positive");
    require(baseline >= 0.0, Errc::invalid_argument, "baseline mu must be nonnegative");
    require(step > 0.0, Errc::invalid_argument, "grid step must be positive");
    require(max_mark_bound > 0.0, Errc::invalid_argument, "mark bound ceiling must be positive");
    require(strip_height > 0.0, Errc::invalid_argument, "strip height must be positive");
  }
};

namespace detail {

// Advance `cursor` past atoms whose left-limit cell precedes `cell`.
inline void skip_to_cell(const std::vector<Atom>& atoms, std::size_t& cursor, double step,
                         std::size_t cell) {
  while (cursor < atoms.size() && GridPath::left_cell_index(step, atoms[cursor].t) < cell) ++cursor;
}

}  // namespace detail

/// Grid simulation of
///   X_t = int K^N(t-s) 1{z <= mu + |X_{s-}|} dpi(s,z) - int K^N(t-s) |X_s| ds,
/// K^N(t) = (t/N)^gamma, on [0, N T] with step N h; the intensity is frozen
/// per cell at its left-endpoint value. Also reports X~_t = X_{Nt} / N on
/// grid h and the counting process thinning pi on [0,T] by |X~|.
inline SimulationOutput simulate_volterra_prelimit(const VolterraConfig& c) {
  c.validate();
  const double n_scale = static_cast<double>(c.scale);
  const double big_step = n_scale * c.step;
  const double big_horizon = n_scale * c.horizon;
  const std::size_t n_pre = GridPath::cell_count(big_step, big_horizon);
  const std::size_t n_res = GridPath::cell_count(c.step, c.horizon);
  const std::size_t n_sim = std::max(n_pre, n_res);
  const Kernel kernel = Kernel::power(c.gamma);

  StripMeasure measure(big_horizon, c.strip_height, false,
                       c.seed.child(stream_key::particle_measures).child(0));
  std::vector<std::size_t> cursors;
  std::vector<double> x(n_sim, 0.0);
  std::vector<double> level(n_sim, 0.0);
  std::vector<double> events;
  SimulationDiagnostics diag;

  for (std::size_t k = 0; k < n_sim; ++k) {
    const double t_k = static_cast<double>(k) * big_step;
    double value = 0.0;
    for (double s : events) value += kernel((t_k - s) / n_scale);
    for (std::size_t j = 0; j < k; ++j)
      value -= kernel((t_k - static_cast<double>(j) * big_step) / n_scale) * std::abs(x[j]) * big_step;
    x[k] = value;
    level[k] = c.feedback ? c.baseline + std::abs(value) : c.baseline;
    if (level[k] > c.max_mark_bound)
      fail(Errc::bound_overflow, "intensity " + std::to_string(level[k]) + " exceeds ceiling " +
                                     std::to_string(c.max_mark_bound) + " at t = " + std::to_string(t_k));
    measure.cover(level[k]);
    while (cursors.size() < measure.strip_count()) {
      cursors.push_back(0);
      detail::skip_to_cell(measure.strip(cursors.size() - 1), cursors.back(), big_step, k);
    }
    for (std::size_t s = 0; s < cursors.size(); ++s) {
      const auto& atoms = measure.strip(s);
      auto& i = cursors[s];
      for (; i < atoms.size() && GridPath::left_cell_index(big_step, atoms[i].t) == k; ++i) {
        ++diag.candidate_atoms;
        if (atoms[i].z <= level[k]) {
          events.push_back(atoms[i].t);
          ++diag.accepted_events;
        } else {
          ++diag.rejected_atoms;
        }
      }
    }
  }
  std::sort(events.begin(), events.end());
  diag.mark_bound = measure.bound();

  PointMeasureWindow window = measure.window();
  std::vector<double> rescaled(n_res);
  std::vector<double> rescaled_abs(n_res);
  for (std::size_t k = 0; k < n_res; ++k) {
    rescaled[k] = x[k] / n_scale;
    rescaled_abs[k] = std::abs(rescaled[k]);
  }
  GridPath rescaled_intensity(c.step, std::move(rescaled_abs), c.horizon);
  StepPath rescaled_counting = thin(rescaled_intensity, window, c.horizon);

  x.resize(n_pre);
  level.resize(n_pre);
  SimulationOutput out{GridPath(big_step, std::move(x), big_horizon),
                       GridPath(big_step, std::move(level), big_horizon),
                       PathVector({StepPath::counting(events, big_horizon)}),
                       {std::move(window)},
                       diag,
                       {}, {}, {}, {}, {}};
  out.rescaled_state_path = GridPath(c.step, std::move(rescaled), c.horizon);
  out.rescaled_counting_paths = PathVector({std::move(rescaled_counting)});
  return out;
}

struct VolterraLimitConfig {
  double gamma = 1.0;
  double horizon = 1.0;
  double step = 0.01;
  double baseline = 0.0;  // mu; adds the drift mu int_0^t K(t-s) ds
  RngStream seed{};
  double noise_scale = 1.0;

  void validate() const {
    require(gamma > 0.0, Errc::invalid_argument, "gamma must be positive");
    require(std::isfinite(horizon) && horizon > 0.0, Errc::invalid_argument, "T must be positive");
    require(step > 0.0, Errc::invalid_argument, "grid step must be positive");
    require(baseline >= 0.0, Errc::invalid_argument, "baseline must be nonnegative");
  }
};

/// Euler scheme for X_t = mu int K(t-s) ds + int K(t-s) sqrt|X_s| dB_s,
/// K(t) = t^gamma:
///   X(t_k) = sum_{j<k} K(t_k - t_j) (mu h + sqrt|X(t_j)| dB_j).
/// O(n^2) in the number of grid cells.
inline GridPath simulate_volterra_limit(const VolterraLimitConfig& c) {
  c.validate();
  const std::size_t n = GridPath::cell_count(c.step, c.horizon);
  const Kernel kernel = Kernel::power(c.gamma);
  std::vector<double> k_table(n + 1);
  for (std::size_t m = 0; m <= n; ++m) k_table[m] = kernel(static_cast<double>(m) * c.step);

  Rng noise(c.seed.child(stream_key::gaussian));
  const double sqrt_h = std::sqrt(c.step);
  std::vector<double> x(n, 0.0);
  std::vector<double> increment(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double v = 0.0;
    for (std::size_t j = 0; j < k; ++j) v += k_table[k - j] * increment[j];
    x[k] = v;
    increment[k] = c.baseline * c.step + std::sqrt(std::abs(v)) * sqrt_h * noise.normal() * c.noise_scale;
  }
  return GridPath(c.step, std::move(x), c.horizon);
}

inline GridPath simulate_volterra_limit(double gamma, double horizon, double step, const RngStream& seed,
                                        double baseline = 0.0) {
  return simulate_volterra_limit(VolterraLimitConfig{gamma, horizon, step, baseline, seed, 1.0});
}

// ---------------------------------------------------------------------------
// Deterministic Volterra equation and the coupled Hawkes-type system
// ---------------------------------------------------------------------------

/// Left-endpoint quadrature for X_t = int_0^t K(t-s) f(X_s) ds:
///   X(t_k) = h sum_{j<k} K(t_k - t_j) f(X(t_j)).
/// Returns X at t_0 .. t_count-1.
inline std::vector<double> volterra_deterministic_values(const Kernel& kernel, const RateFunction& f,
                                                         std::size_t count, double step) {
  std::vector<double> k_table(count + 1);
  for (std::size_t m = 0; m <= count; ++m) k_table[m] = kernel(static_cast<double>(m) * step);
  std::vector<double> x(count, 0.0);
  std::vector<double> fx(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    double v = 0.0;
    for (std::size_t j = 0; j < k; ++j) v += k_table[k - j] * fx[j];
    x[k] = v * step;
    fx[k] = f(x[k]);
  }
  return x;
}

inline GridPath solve_volterra_deterministic(const Kernel& kernel, const RateFunction& f, double horizon,
                                             double step) {
  require(step > 0.0, Errc::invalid_argument, "grid step must be positive");
  require(std::isfinite(horizon) && horizon > 0.0, Errc::invalid_argument, "T must be positive");
  const std::size_t n = GridPath::cell_count(step, horizon);
  return GridPath(step, volterra_deterministic_values(kernel, f, n, step), horizon);
}

struct HawkesMeanFieldConfig {
  Kernel kernel = Kernel::exponential(1.0);
  RateFunction rate = RateFunction::affine(1.0, 0.5);
  int particles = 1;
  double horizon = 1.0;
  int observed = 1;
  double step = 0.01;
  RngStream seed{};
  double max_mark_bound = 1e6;
  double strip_height = 1.0;

  void validate() const {
    require(particles >= 1, Errc::invalid_argument, "N must be >= 1");
    require(observed >= 1 && observed <= particles, Errc::invalid_argument, "n_obs must lie in [1, N]");
    require(std::isfinite(horizon) && horizon > 0.0, Errc::invalid_argument, "T must be positive");
    require(step > 0.0, Errc::invalid_argument, "grid step must be positive");
    require(max_mark_bound > 0.0, Errc::invalid_argument, "mark bound ceiling must be positive");
    require(strip_height > 0.0, Errc::invalid_argument, "strip height must be positive");
  }
};

/// N-particle system X_t = N^{-1} sum_j int K(t-s) 1{z <= f(X_{s-})} dpi^j(s,z)
/// on grid h (intensity frozen per cell), coupled with its deterministic
/// limit: the observed measures pi^i are thinned both by f(X^N) and by
/// f(X-bar), so Z^{N,i} - Z-bar^i is a pathwise quantity.
inline SimulationOutput simulate_hawkes_coupled(const HawkesMeanFieldConfig& c) {
  c.validate();
  const std::size_t n = GridPath::cell_count(c.step, c.horizon);
  const auto particles = static_cast<std::size_t>(c.particles);
  const double inv_n = 1.0 / static_cast<double>(c.particles);
  const bool exponential = c.kernel.kind() == Kernel::Kind::exponential;
  const double beta = c.kernel.parameter();

  std::vector<StripMeasure> measures;
  measures.reserve(particles);
  for (std::size_t j = 0; j < particles; ++j)
    measures.emplace_back(c.horizon, c.strip_height, false,
                          c.seed.child(stream_key::particle_measures).child(j));
  std::vector<std::vector<std::size_t>> cursors(particles);

  std::vector<double> x(n, 0.0);
  std::vector<double> level(n, 0.0);
  std::vector<double> all_events;
  std::vector<double> cell_events;  // events of the previous cell (exponential recursion)
  double exp_sum = 0.0;
  std::vector<std::vector<double>> observed(static_cast<std::size_t>(c.observed));
  SimulationDiagnostics diag;

  auto check_bound = [&](double v, double t) {
    if (v > c.max_mark_bound)
      fail(Errc::bound_overflow, "intensity " + std::to_string(v) + " exceeds ceiling " +
                                     std::to_string(c.max_mark_bound) + " at t = " + std::to_string(t));
  };

  for (std::size_t k = 0; k < n; ++k) {
    const double t_k = static_cast<double>(k) * c.step;
    if (exponential) {
      if (k > 0) {
        const double t_prev = static_cast<double>(k - 1) * c.step;
        exp_sum *= std::exp(-beta * (t_k - t_prev));
        for (double s : cell_events) exp_sum += std::exp(-beta * (t_k - s));
      }
      x[k] = exp_sum * inv_n;
    } else {
      double v = 0.0;
      for (double s : all_events) v += c.kernel(t_k - s);
      x[k] = v * inv_n;
    }
    level[k] = c.rate(x[k]);
    check_bound(level[k], t_k);
    cell_events.clear();

    for (std::size_t j = 0; j < particles; ++j) {
      measures[j].cover(level[k]);
      auto& cur = cursors[j];
      while (cur.size() < measures[j].strip_count()) {
        cur.push_back(0);
        detail::skip_to_cell(measures[j].strip(cur.size() - 1), cur.back(), c.step, k);
      }
      for (std::size_t s = 0; s < cur.size(); ++s) {
        const auto& atoms = measures[j].strip(s);
        auto& i = cur[s];
        for (; i < atoms.size() && GridPath::left_cell_index(c.step, atoms[i].t) == k; ++i) {
          ++diag.candidate_atoms;
          if (atoms[i].z <= level[k]) {
            ++diag.accepted_events;
            cell_events.push_back(atoms[i].t);
            if (!exponential) all_events.push_back(atoms[i].t);
            if (j < observed.size()) observed[j].push_back(atoms[i].t);
          } else {
            ++diag.rejected_atoms;
          }
        }
      }
    }
  }

  std::vector<double> limit_x = volterra_deterministic_values(c.kernel, c.rate, n, c.step);
  std::vector<double> limit_level(n);
  for (std::size_t k = 0; k < n; ++k) limit_level[k] = c.rate(limit_x[k]);
  const double limit_sup = *std::max_element(limit_level.begin(), limit_level.end());
  check_bound(limit_sup, c.horizon);

  GridPath intensity(c.step, level, c.horizon);
  GridPath limit_intensity(c.step, std::move(limit_level), c.horizon);
  std::vector<StepPath> counting;
  std::vector<StepPath> limit_counting;
  std::vector<PointMeasureWindow> windows;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    measures[i].cover(limit_sup);
    windows.push_back(measures[i].window());
    std::sort(observed[i].begin(), observed[i].end());
    counting.push_back(StepPath::counting(observed[i], c.horizon));
    limit_counting.push_back(thin(limit_intensity, windows.back(), c.horizon));
  }
  for (const StripMeasure& m : measures) diag.mark_bound = std::max(diag.mark_bound, m.bound());

  SimulationOutput out{GridPath(c.step, std::move(x), c.horizon),
                       std::move(intensity),
                       PathVector(std::move(counting)),
                       std::move(windows),
                       diag,
                       {}, {}, {}, {}, {}};
  out.limit_state_path = GridPath(c.step, std::move(limit_x), c.horizon);
  out.limit_intensity_path = std::move(limit_intensity);
  out.limit_counting_paths = PathVector(std::move(limit_counting));
  return out;
}

}  // namespace ppconv
