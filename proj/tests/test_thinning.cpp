#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppconv/thinning.hpp"

using namespace ppconv;

namespace {

// Naive oracle: scan every atom, look up the left-limit cell by a linear
// search over cell boundaries.
StepPath naive_thin(const GridPath& x, const PointMeasureWindow& w, double horizon) {
  std::vector<double> accepted;
  const auto values = x.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Atom& a = w.atoms()[i];
    if (a.t > horizon) continue;
    std::size_t cell = 0;
    for (std::size_t k = 0; k < values.size(); ++k)
      if (static_cast<double>(k) * x.step() < a.t) cell = k;
    if (a.z <= values[cell]) accepted.push_back(a.t);
  }
  return StepPath::counting(accepted, horizon);
}

GridPath random_grid(Rng& rng, double horizon, double step, double top) {
  std::vector<double> v(GridPath::cell_count(step, horizon));
  for (auto& x : v) x = top * rng.uniform01();
  return GridPath(step, std::move(v), horizon);
}

}  // namespace

TEST(Phi, ConstantIntensityAcceptsAtomOnBoundary) {
  const PointMeasureWindow w(2.0, 1.0, false, {{1.0, 1.0, {}}});
  const PathVector z = phi({{StepPath::constant(1.0, 2.0)}, {w}, 2.0});
  ASSERT_EQ(z[0].jump_count(), 1u);
  EXPECT_EQ(z[0].jumps()[0].time, 1.0);
  EXPECT_EQ(z[0].eval_left(1.0), 0.0);
  EXPECT_EQ(z[0].eval(1.0), 1.0);
}

TEST(Phi, TentDipRejectsAtom) {
  const PointMeasureWindow w(2.0, 1.0, false, {{1.0, 1.0, {}}});
  for (int n : {1, 2, 4, 8, 16, 1000}) {
    const PathVector z = phi({{tent_dip_path(n, 2.0)}, {w}, 2.0});
    EXPECT_EQ(z[0].jump_count(), 0u) << "n=" << n;
  }
}

TEST(Phi, EmptyMeasuresGiveZero) {
  Rng rng(RngStream{2, 1});
  ThinningInput in;
  in.horizon = 3.0;
  for (int j = 0; j < 3; ++j) {
    in.intensities.push_back(random_grid(rng, 3.0, 0.1, 2.0));
    in.measures.emplace_back(3.0, 2.0, false);
  }
  const PathVector z = phi(in);
  for (const StepPath& p : z.components()) EXPECT_EQ(p.jump_count(), 0u);
}

TEST(Phi, EqualsNaiveOracle) {
  Rng rng(RngStream{2, 2});
  for (int rep = 0; rep < 1000; ++rep) {
    const double step = 0.05 + 0.2 * rng.uniform01();
    const auto x = random_grid(rng, 3.0, step, 2.0);
    const auto w = sample_window(3.0, 2.0, false, RngStream{2, 100 + static_cast<std::uint64_t>(rep)});
    const StepPath got = phi({{x}, {w}, 3.0})[0];
    EXPECT_EQ(got, naive_thin(x, w, 3.0));
  }
}

TEST(Phi, MarkBoundBelowSupremumThrows) {
  const PointMeasureWindow w(2.0, 1.0, false);
  try {
    phi({{StepPath::constant(1.5, 2.0)}, {w}, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::mark_bound);
    EXPECT_FALSE(e.is_validation());
  }
}

TEST(Phi, InputValidation) {
  const PointMeasureWindow w(2.0, 2.0, false);
  EXPECT_THROW(phi({{}, {}, 1.0}), Error);
  EXPECT_THROW(phi({{StepPath::constant(1.0, 2.0)}, {w, w}, 1.0}), Error);
  EXPECT_THROW(phi({{StepPath::constant(-1.0, 2.0)}, {w}, 1.0}), Error);
  EXPECT_THROW(phi({{StepPath::constant(1.0, 1.0)}, {w}, 1.5}), Error);
}

TEST(Phi, MonotoneInIntensity) {
  Rng rng(RngStream{2, 3});
  for (int rep = 0; rep < 200; ++rep) {
    const auto lo = random_grid(rng, 2.0, 0.1, 1.5);
    std::vector<double> hi_v(lo.values().begin(), lo.values().end());
    for (auto& v : hi_v) v += 0.5 * rng.uniform01();
    const GridPath hi(0.1, hi_v, 2.0);
    const auto w = sample_window(2.0, 2.0, false, RngStream{2, 1000 + static_cast<std::uint64_t>(rep)});
    const StepPath a = phi({{lo}, {w}, 2.0})[0];
    const StepPath b = phi({{hi}, {w}, 2.0})[0];
    for (int k = 0; k <= 40; ++k) EXPECT_LE(a.eval(k * 0.05), b.eval(k * 0.05));
  }
}

TEST(Phi, BoundedByAtomCount) {
  Rng rng(RngStream{2, 4});
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_grid(rng, 2.0, 0.1, 2.0);
    const auto w = sample_window(2.0, 2.0, false, RngStream{2, 2000 + static_cast<std::uint64_t>(rep)});
    const StepPath z = phi({{x}, {w}, 2.0})[0];
    for (int k = 0; k < 40; ++k) {
      const double t = k * 0.05;
      EXPECT_LE(z.eval(t), static_cast<double>(count(w, {0.0, std::nextafter(t, INFINITY), 0.0, 2.0})));
    }
  }
}

TEST(Phi, RestrictionEquivariance) {
  Rng rng(RngStream{2, 5});
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_grid(rng, 2.0, 0.1, 2.0);
    const auto w = sample_window(2.0, 2.0, false, RngStream{2, 3000 + static_cast<std::uint64_t>(rep)});
    const double tp = 0.2 + 1.6 * rng.uniform01();
    const StepPath full = phi({{x}, {w}, 2.0})[0];
    const StepPath part = phi({{x}, {restrict(w, tp, 2.0)}, tp})[0];
    std::vector<double> kept;
    for (double t : full.jump_times())
      if (t < tp) kept.push_back(t);
    EXPECT_EQ(part.jump_times(), kept);
  }
}

TEST(Conditions, CounterexampleViolatesD) {
  const PointMeasureWindow w(2.0, 1.0, false, {{1.0, 1.0, {}}});
  const auto rep = check_conditions({{StepPath::constant(1.0, 2.0)}, {w}, 2.0});
  EXPECT_TRUE(rep.condition_a);
  EXPECT_TRUE(rep.condition_b);
  EXPECT_TRUE(rep.condition_c);
  EXPECT_FALSE(rep.condition_d);
  ASSERT_EQ(rep.violations_d.size(), 1u);
  EXPECT_EQ(rep.violations_d[0], (AtomRef{0, 1.0, 1.0}));
}

TEST(Conditions, EmptyMeasuresPass) {
  const auto rep = check_conditions({{StepPath::constant(1.0, 2.0)}, {PointMeasureWindow(2.0, 1.0, false)}, 2.0});
  EXPECT_TRUE(rep.all());
  EXPECT_TRUE(rep.violations_a.empty() && rep.violations_b.empty() && rep.violations_c.empty() &&
              rep.violations_d.empty());
}

TEST(Conditions, SharedTimeAcrossMeasures) {
  const PointMeasureWindow a(2.0, 1.0, false, {{1.0, 0.2, {}}});
  const PointMeasureWindow b(2.0, 1.0, false, {{1.0, 0.7, {}}, {1.5, 0.1, {}}});
  const auto x = StepPath::constant(1.0, 2.0);
  const auto rep = check_conditions({{x, x}, {a, b}, 2.0});
  EXPECT_FALSE(rep.condition_b);
  EXPECT_EQ(rep.violations_b.size(), 2u);
  EXPECT_TRUE(rep.condition_a && rep.condition_c && rep.condition_d);
}

TEST(Conditions, AtomAtIntensityJump) {
  const PointMeasureWindow w(2.0, 3.0, false, {{1.0, 0.5, {}}});
  const auto step = check_conditions({{StepPath(1.0, {{1.0, 3.0}}, 2.0)}, {w}, 2.0});
  EXPECT_FALSE(step.condition_c);
  const auto grid = check_conditions({{GridPath(0.5, {1.0, 1.0, 3.0, 3.0}, 2.0)}, {w}, 2.0});
  EXPECT_FALSE(grid.condition_c);
  const auto flat = check_conditions({{GridPath(0.5, {1.0, 1.0, 1.0, 3.0}, 2.0)}, {w}, 2.0});
  EXPECT_TRUE(flat.condition_c);
}

TEST(Conditions, BoundaryTieUsesLeftLimit) {
  // Intensity jumps from 1 to 3 at t = 2; the atom (2, 1) sits on the left limit.
  const PointMeasureWindow w(3.0, 3.0, false, {{2.0, 1.0, {}}});
  const ThinningInput in{{StepPath(1.0, {{2.0, 3.0}}, 3.0)}, {w}, 3.0};
  EXPECT_EQ(phi(in)[0].jump_count(), 1u);
  const auto rep = check_conditions(in);
  EXPECT_FALSE(rep.condition_d);
  EXPECT_FALSE(rep.condition_c);
}

TEST(Conditions, IndependentSamplesPassAlmostSurely) {
  Rng rng(RngStream{2, 6});
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = random_grid(rng, 2.0, 0.1, 2.0);
    const auto w = sample_window(2.0, 2.0, false, RngStream{2, 4000 + static_cast<std::uint64_t>(rep)});
    const auto w2 = sample_window(2.0, 2.0, false, RngStream{2, 9000 + static_cast<std::uint64_t>(rep)});
    EXPECT_TRUE(check_conditions({{x, x}, {w, w2}, 2.0}).all());
  }
}

TEST(Phi, ContinuityUnderSmallPerturbations) {
  // Atom z-margins of 0.25 around levels keep decisions stable for small perturbations.
  const StepPath x(1.0, {{0.8, 2.0}, {1.6, 0.5}}, 2.0);
  const PointMeasureWindow w(2.0, 3.0, false, {{0.3, 0.5, {}}, {1.0, 1.5, {}}, {1.2, 2.5, {}}, {1.9, 0.2, {}}});
  const PathVector base = phi({{x}, {w}, 2.0});
  double last = INFINITY;
  for (double d : {1e-1, 1e-2, 1e-3}) {
    const StepPath xd(1.0 + d, {{0.8 + d, 2.0 - d}, {1.6 - d, 0.5 + d}}, 2.0);
    const PointMeasureWindow wd(2.0, 3.0, false,
                                {{0.3 + d, 0.5 - d, {}}, {1.0 + d, 1.5 + d, {}}, {1.2 + d, 2.5, {}}, {1.9 - d, 0.2 + d, {}}});
    const double dist = skorohod_upper_distance(base, phi({{xd}, {wd}, 2.0})).distance;
    EXPECT_LE(dist, last);
    EXPECT_LE(dist, d + 1e-12);
    last = dist;
  }
}
