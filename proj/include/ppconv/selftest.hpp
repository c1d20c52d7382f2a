#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ppconv/diagnostics.hpp"
#include "ppconv/io.hpp"
#include "ppconv/models.hpp"
#include "ppconv/thinning.hpp"

namespace ppconv {

enum class SelftestLevel { quick, full };

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace selftest_detail {

struct Scale {
  int windows;
  int oracle_inputs;
  int matchings;
  int rate_replicates;
};

inline Scale scale_for(SelftestLevel level) {
  return level == SelftestLevel::quick ? Scale{2000, 100, 50, 0} : Scale{10000, 1000, 500, 200};
}

inline std::string fmt(double v) { return format_double(v); }

inline GridPath random_grid(Rng& rng, double horizon, double step, double top) {
  std::vector<double> v(GridPath::cell_count(step, horizon));
  for (auto& x : v) x = top * rng.uniform01();
  return GridPath(step, std::move(v), horizon);
}

inline StepPath naive_thin(const GridPath& x, const PointMeasureWindow& w, double horizon) {
  std::vector<double> accepted;
  const auto values = x.values();
  for (const Atom& a : w.atoms()) {
    if (a.t > horizon) continue;
    std::size_t cell = 0;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (static_cast<double>(k) * x.step() < a.t) cell = k;
    if (a.z <= values[cell]) accepted.push_back(a.t);
  }
  return StepPath::counting(accepted, horizon);
}

inline double brute_force_bottleneck(std::span<const Atom> a, std::span<const Atom> b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::max(std::abs(a[i].t - b[perm[i]].t), std::abs(a[i].z - b[perm[i]].z)));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace selftest_detail

/// Runs the named invariant checks. Each check reports instead of throwing;
/// an exception inside a check counts as its failure.
inline std::vector<SelftestResult> run_selftest(SelftestLevel level, std::uint64_t seed = 20240611) {
  using namespace selftest_detail;
  const Scale sc = scale_for(level);
  const RngStream root{seed, 0x5e1f7e57};
  std::vector<SelftestResult> results;

  auto check = [&](std::string name, const std::function<std::string(bool&)>& body) {
    SelftestResult r{std::move(name), true, {}};
    try {
      r.detail = body(r.passed);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results.push_back(std::move(r));
  };

  check("thinning.boundary_tie_accepted", [](bool& ok) {
    // Left limit 1 at t = 2; the atom (2, 1) lies exactly on it and must be accepted.
    const PointMeasureWindow w(3.0, 3.0, false, {{2.0, 1.0, {}}});
    const auto z = phi({{StepPath(1.0, {{2.0, 3.0}}, 3.0)}, {w}, 3.0});
    ok = z[0].jump_count() == 1;
    return "jumps=" + std::to_string(z[0].jump_count());
  });

  check("thinning.counterexample", [](bool& ok) {
    const PointMeasureWindow w(2.0, 1.0, false, {{1.0, 1.0, {}}});
    const auto zx = phi({{StepPath::constant(1.0, 2.0)}, {w}, 2.0});
    ok = zx[0].jump_count() == 1 && zx[0].jumps()[0].time == 1.0;
    for (int n : {1, 2, 4, 8, 16}) ok = ok && phi({{tent_dip_path(n, 2.0)}, {w}, 2.0})[0].jump_count() == 0;
    ok = ok && !check_conditions({{StepPath::constant(1.0, 2.0)}, {w}, 2.0}).condition_d;
    return std::string(ok ? "" : "phi(x) or phi(x^n) or condition (d) wrong");
  });

  check("thinning.naive_oracle", [&](bool& ok) {
    Rng rng(root.child(1));
    int mismatches = 0;
    for (int i = 0; i < sc.oracle_inputs; ++i) {
      const auto x = random_grid(rng, 3.0, 0.05 + 0.2 * rng.uniform01(), 2.0);
      const auto w = sample_window(3.0, 2.0, false, root.child(2).child(static_cast<std::uint64_t>(i)));
      if (!(phi({{x}, {w}, 3.0})[0] == naive_thin(x, w, 3.0))) ++mismatches;
    }
    ok = mismatches == 0;
    return "mismatches=" + std::to_string(mismatches) + "/" + std::to_string(sc.oracle_inputs);
  });

  check("thinning.independent_inputs_satisfy_conditions", [&](bool& ok) {
    Rng rng(root.child(3));
    int bad = 0;
    for (int i = 0; i < sc.oracle_inputs; ++i) {
      const auto x = random_grid(rng, 2.0, 0.1, 2.0);
      const auto w = sample_window(2.0, 2.0, false, root.child(4).child(static_cast<std::uint64_t>(i)));
      if (!check_conditions({{x}, {w}, 2.0}).all()) ++bad;
    }
    ok = bad == 0;
    return "violations=" + std::to_string(bad);
  });

  check("poisson.mean_and_variance", [&](bool& ok) {
    std::vector<double> counts;
    for (int i = 0; i < sc.windows; ++i)
      counts.push_back(static_cast<double>(
          sample_window(2.0, 3.0, false, root.child(5).child(static_cast<std::uint64_t>(i))).size()));
    const double n = static_cast<double>(counts.size());
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
    double var = 0.0;
    for (double c : counts) var += (c - mean) * (c - mean);
    var /= n - 1.0;
    // 4 sigma of each estimator for Poisson(6)
    ok = std::abs(mean - 6.0) <= 4.0 * std::sqrt(6.0 / n) &&
         std::abs(var - 6.0) <= 4.0 * std::sqrt((6.0 + 2.0 * 36.0) / n);
    return "mean=" + fmt(mean) + " var=" + fmt(var);
  });

  check("poisson.sampled_windows_simple", [&](bool& ok) {
    int bad = 0;
    for (int i = 0; i < sc.windows / 10; ++i)
      if (!is_simple(sample_window(10.0, 5.0, false, root.child(6).child(static_cast<std::uint64_t>(i))))) ++bad;
    ok = bad == 0;
    return "non_simple=" + std::to_string(bad);
  });

  check("poisson.restrict_matches_count", [&](bool& ok) {
    ok = true;
    for (int i = 0; i < 100; ++i) {
      const auto w = sample_window(2.0, 3.0, false, root.child(7).child(static_cast<std::uint64_t>(i)));
      ok = ok && restrict(w, 1.3, 1.7).size() == count(w, {0.0, 1.3, 0.0, 1.7});
    }
    return std::string();
  });

  check("poisson.match_atoms_bottleneck_optimal", [&](bool& ok) {
    Rng rng(root.child(8));
    int bad = 0;
    for (int i = 0; i < sc.matchings; ++i) {
      const std::size_t n = 1 + rng.next_u64() % 6;
      std::vector<Atom> a(n);
      std::vector<Atom> b(n);
      for (auto& x : a) x = {3.0 * rng.uniform01(), 2.0 * rng.uniform01(), {}};
      for (auto& x : b) x = {3.0 * rng.uniform01(), 2.0 * rng.uniform01(), {}};
      if (match_atoms(a, b).max_displacement != brute_force_bottleneck(a, b)) ++bad;
    }
    ok = bad == 0;
    return "mismatches=" + std::to_string(bad);
  });

  check("paths.skorohod_identity_and_symmetry", [](bool& ok) {
    const StepPath a(0.0, {{1.0, 1.0}, {2.0, 2.0}}, 3.0);
    const StepPath b(0.0, {{1.1, 1.0}, {1.9, 2.0}}, 3.0);
    const double ab = skorohod_upper_distance(a, b).distance;
    ok = skorohod_upper_distance(a, a).distance == 0.0 && ab == skorohod_upper_distance(b, a).distance &&
         std::abs(ab - 0.1) < 1e-12;
    return "d=" + fmt(ab);
  });

  check("models.strip_superposition", [&](bool& ok) {
    ok = true;
    for (std::uint64_t s = 0; s < 20; ++s) {
      StripMeasure m(3.0, 0.5, false, root.child(9).child(s));
      m.cover(1.0);
      const auto low = m.window();
      m.cover(2.0);
      ok = ok && restrict(m.window(), 3.0, low.mark_bound()) == low;
    }
    return std::string();
  });

  check("models.meanfield_rethin", [&](bool& ok) {
    MeanFieldDiffusiveConfig c{1.0, 20, 2.0, 4, root.child(10), 1.0};
    const auto out = simulate_meanfield_prelimit(c);
    ok = true;
    for (std::size_t i = 0; i < out.windows_used.size(); ++i)
      ok = ok && thin(out.intensity_path, out.windows_used[i], c.horizon) == out.counting_paths[i];
    return "events=" + std::to_string(out.diagnostics.accepted_events);
  });

  check("models.hawkes_constant_rate_collapse", [&](bool& ok) {
    HawkesMeanFieldConfig c;
    c.rate = RateFunction::constant(1.5);
    c.particles = 16;
    c.observed = 4;
    c.horizon = 3.0;
    c.seed = root.child(11);
    const auto out = simulate_hawkes_coupled(c);
    ok = out.counting_paths == *out.limit_counting_paths;
    return std::string();
  });

  check("models.hawkes_rethin", [&](bool& ok) {
    HawkesMeanFieldConfig c;
    c.particles = 16;
    c.observed = 4;
    c.horizon = 3.0;
    c.seed = root.child(12);
    const auto out = simulate_hawkes_coupled(c);
    ok = true;
    for (std::size_t i = 0; i < out.windows_used.size(); ++i) {
      ok = ok && thin(out.intensity_path, out.windows_used[i], c.horizon) == out.counting_paths[i];
      ok = ok && thin(*out.limit_intensity_path, out.windows_used[i], c.horizon) == (*out.limit_counting_paths)[i];
    }
    return std::string();
  });

  check("models.volterra_rescaling_identity", [&](bool& ok) {
    VolterraConfig c;
    c.scale = 8;
    c.seed = root.child(13);
    const auto out = simulate_volterra_prelimit(c);
    const auto& pre = std::get<GridPath>(out.state_path).values();
    const auto& res = std::get<GridPath>(*out.rescaled_state_path).values();
    ok = pre.size() == res.size();
    for (std::size_t k = 0; ok && k < res.size(); ++k) ok = res[k] == pre[k] / 8.0;
    return std::string();
  });

  check("models.deterministic_volterra_closed_forms", [](bool& ok) {
    auto err = [](const RateFunction& f, double h, auto exact) {
      const auto x = solve_volterra_deterministic(Kernel::exponential(1.0), f, 5.0, h);
      double e = 0.0;
      for (std::size_t k = 0; k < x.values().size(); ++k)
        e = std::max(e, std::abs(x.values()[k] - exact(static_cast<double>(k) * h)));
      return e;
    };
    auto c1 = [](double t) { return 1.0 - std::exp(-t); };
    auto c2 = [](double t) { return 2.0 * (1.0 - std::exp(-t / 2.0)); };
    const double e1 = err(RateFunction::constant(1.0), 1e-3, c1);
    const double e2 = err(RateFunction::affine(1.0, 0.5), 1e-3, c2);
    const double r1 = err(RateFunction::constant(1.0), 2e-3, c1) / e1;
    const double r2 = err(RateFunction::affine(1.0, 0.5), 2e-3, c2) / e2;
    ok = e1 <= 5e-3 && e2 <= 5e-3 && r1 >= 1.5 && r1 <= 2.5 && r2 >= 1.5 && r2 <= 2.5;
    return "err_const=" + fmt(e1) + " err_affine=" + fmt(e2) + " ratios=" + fmt(r1) + "," + fmt(r2);
  });

  check("diagnostics.ks_and_fit_exact", [](bool& ok) {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{1.0, 2.0, 4.0};
    RateCurve curve;
    for (int n : {8, 16, 32, 64}) curve.rows.push_back({n, 1.0 / std::sqrt(n), 0.01, 10});
    const auto fit = fit_rate(curve);
    ok = std::abs(ks_statistic(a, b) - 1.0 / 3.0) < 1e-15 && std::abs(fit.slope + 0.5) < 1e-12 &&
         std::abs(fit.r_squared - 1.0) < 1e-12;
    return "slope=" + fmt(fit.slope);
  });

  check("io.round_trip", [&](bool& ok) {
    const auto w = sample_window(3.0, 2.0, true, root.child(14));
    std::stringstream ws;
    write_window_csv(ws, w);
    MeanFieldDiffusiveConfig c{1.0, 5, 2.0, 1, root.child(15), 1.0};
    const auto out = simulate_meanfield_prelimit(c);
    std::stringstream ps;
    write_path_csv(ps, out.intensity_path);
    ok = read_window_csv(ws) == w && read_path_csv(ps) == out.intensity_path;
    return std::string();
  });

  check("determinism.repeat_run", [&](bool& ok) {
    HawkesMeanFieldConfig c;
    c.particles = 32;
    c.horizon = 3.0;
    c.seed = root.child(16);
    const std::vector<int> ns{4, 16};
    ok = coupling_error_curve(c, ns, 8, 1) == coupling_error_curve(c, ns, 8, 4);
    return std::string();
  });

  if (level == SelftestLevel::full) {
    check("diagnostics.coupling_rate", [&](bool& ok) {
      HawkesMeanFieldConfig c;
      c.horizon = 5.0;
      c.seed = RngStream{seed, 0};
      const std::vector<int> ns{8, 16, 32, 64, 128, 256, 512};
      const auto fit = fit_rate(coupling_error_curve(c, ns, sc.rate_replicates));
      ok = fit.slope >= -0.65 && fit.slope <= -0.35;
      return "slope=" + fmt(fit.slope) + " r2=" + fmt(fit.r_squared);
    });
  }
  return results;
}

}  // namespace ppconv
