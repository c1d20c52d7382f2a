#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppconv/cadlag_paths.hpp"
#include "ppconv/rng.hpp"

using namespace ppconv;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::parse;
}

StepPath random_step(Rng& rng, double horizon, int max_jumps) {
  const int n = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_jumps + 1));
  std::vector<double> times;
  for (int i = 0; i < n; ++i) times.push_back(horizon * (0.001 + 0.998 * rng.uniform01()));
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<Jump> jumps;
  for (double t : times) jumps.push_back({t, 4.0 * rng.uniform01() - 2.0});
  return StepPath(4.0 * rng.uniform01() - 2.0, std::move(jumps), horizon);
}

}  // namespace

TEST(StepPath, ConstantPath) {
  const auto p = StepPath::constant(1.0, 2.0);
  EXPECT_EQ(p.eval(0.5), 1.0);
  EXPECT_EQ(p.eval_left(0.5), 1.0);
  EXPECT_EQ(p.sup_norm(2.0), 1.0);
}

TEST(StepPath, RightContinuousWithLeftLimit) {
  const StepPath p(0.0, {{1.0, 1.0}}, 2.0);
  EXPECT_EQ(p.eval(1.0), 1.0);
  EXPECT_EQ(p.eval_left(1.0), 0.0);
  EXPECT_EQ(p.eval(0.0), 0.0);
  EXPECT_FALSE(p.is_continuous_at(1.0));
  EXPECT_TRUE(p.is_continuous_at(0.5));
}

TEST(StepPath, DomainErrors) {
  const StepPath p(0.0, {{1.0, 1.0}}, 2.0);
  EXPECT_EQ(code_of([&] { p.eval(2.5); }), Errc::out_of_domain);
  EXPECT_EQ(code_of([&] { p.eval(-0.1); }), Errc::out_of_domain);
  EXPECT_EQ(code_of([&] { p.eval_left(0.0); }), Errc::out_of_domain);
  EXPECT_EQ(code_of([&] { p.sup_norm(3.0); }), Errc::out_of_domain);
}

TEST(StepPath, ValidatesJumps) {
  EXPECT_THROW(StepPath(0.0, {{0.0, 1.0}}, 1.0), Error);
  EXPECT_THROW(StepPath(0.0, {{1.5, 1.0}}, 1.0), Error);
  EXPECT_THROW(StepPath(0.0, {{0.5, 1.0}, {0.5, 2.0}}, 1.0), Error);
  EXPECT_NO_THROW(StepPath(0.0, {{1.0, 1.0}}, 1.0));
}

TEST(StepPath, SupNormEnumeratesSegments) {
  const StepPath p(1.0, {{0.5, -3.0}, {1.2, 0.0}}, 2.0);
  EXPECT_EQ(p.sup_norm(1.0), 3.0);
  EXPECT_EQ(p.sup_norm(0.4), 1.0);
}

TEST(StepPath, SupNormMonotoneInHorizon) {
  Rng rng(RngStream{1, 1});
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = random_step(rng, 3.0, 8);
    const double t = 3.0 * rng.uniform01();
    EXPECT_LE(p.sup_norm(t), p.sup_norm(3.0));
  }
}

TEST(GridPath, CellConvention) {
  const GridPath p(0.5, {0.0, 2.0, 4.0}, 1.5);
  EXPECT_EQ(p.eval(1.0), 4.0);
  EXPECT_EQ(p.eval_left(1.0), 2.0);
  EXPECT_EQ(p.eval(0.75), 2.0);
  EXPECT_EQ(p.eval_left(0.75), 2.0);
  EXPECT_EQ(p.eval(1.5), 4.0);
  EXPECT_EQ(p.eval_left(1.5), 4.0);
  EXPECT_FALSE(p.is_continuous_at(1.0));
  EXPECT_TRUE(p.is_continuous_at(0.9));
}

TEST(GridPath, CellCountIsCeiling) {
  EXPECT_EQ(GridPath::cell_count(0.5, 1.5), 3u);
  EXPECT_EQ(GridPath::cell_count(0.5, 1.6), 4u);
  EXPECT_EQ(GridPath::cell_count(0.1, 1.0), 10u);
  EXPECT_EQ(GridPath::cell_count(1e-3, 5.0), 5000u);
  EXPECT_THROW(GridPath(0.5, {1.0, 2.0}, 1.5), Error);
}

TEST(GridPath, IndexLookupsAreExactAtGridPoints) {
  const double h = 0.1;
  for (std::size_t k = 1; k < 1000; ++k) {
    const double t = static_cast<double>(k) * h;
    EXPECT_EQ(GridPath::cell_index(h, t), k);
    EXPECT_EQ(GridPath::left_cell_index(h, t), k - 1);
    EXPECT_EQ(GridPath::left_cell_index(h, std::nextafter(t, INFINITY)), k);
  }
}

TEST(GridPath, ToStepAgrees) {
  Rng rng(RngStream{1, 2});
  std::vector<double> values(37);
  for (auto& v : values) v = std::floor(3.0 * rng.uniform01());
  const GridPath g(0.1, values, 3.7);
  const StepPath s = g.to_step();
  for (int i = 0; i < 500; ++i) {
    const double t = 3.7 * rng.uniform01();
    EXPECT_EQ(g.eval(t), s.eval(t));
    if (t > 0.0) EXPECT_EQ(g.eval_left(t), s.eval_left(t));
  }
  for (std::size_t k = 1; k < 37; ++k) EXPECT_EQ(g.eval_left(g.cell_start(k)), s.eval_left(g.cell_start(k)));
}

TEST(LinearPath, InterpolatesAndIsContinuous) {
  const LinearPath p({{0.0, 1.0}, {1.0, 3.0}, {2.0, 1.0}});
  EXPECT_EQ(p.eval(0.5), 2.0);
  EXPECT_EQ(p.eval_left(1.0), 3.0);
  EXPECT_EQ(p.sup_norm(2.0), 3.0);
  EXPECT_EQ(p.range(0.5), (std::pair{1.0, 2.0}));
  EXPECT_TRUE(p.is_continuous_at(1.0));
}

TEST(DecayPath, MatchesFormula) {
  const DecayPath p(1.0, 2.0, {{0.0, 0.0}, {0.5, 4.0}}, 2.0);
  EXPECT_EQ(p.eval(0.25), 1.0);
  EXPECT_EQ(p.eval_left(0.5), 1.0);
  EXPECT_EQ(p.eval(0.5), 5.0);
  EXPECT_DOUBLE_EQ(p.eval(1.0), 1.0 + 4.0 * std::exp(-1.0));
  EXPECT_FALSE(p.is_continuous_at(0.5));
  EXPECT_EQ(p.range(2.0).second, 5.0);
}

TEST(TimeChange, IdentityAndInverse) {
  const TimeChange id = TimeChange::identity(3.0);
  EXPECT_EQ(id(1.7), 1.7);
  EXPECT_EQ(id.distance_to_identity(), 0.0);
  const TimeChange lam({{0.0, 0.0}, {1.0, 1.2}, {3.0, 3.0}});
  EXPECT_NEAR(lam.distance_to_identity(), 0.2, 1e-15);
  const TimeChange inv = lam.inverse();
  for (double s : {0.3, 1.0, 2.2}) EXPECT_NEAR(inv(lam(s)), s, 1e-12);
  EXPECT_THROW(TimeChange({{0.0, 0.0}, {1.0, 1.5}}), Error);
  EXPECT_THROW(TimeChange({{0.0, 0.0}, {1.0, 0.5}, {0.9, 1.0}}), Error);
}

TEST(Skorohod, IdenticalPathsGiveZero) {
  Rng rng(RngStream{1, 3});
  const PathVector g({random_step(rng, 2.0, 5), random_step(rng, 2.0, 5)});
  const auto b = skorohod_upper_distance(g, g);
  EXPECT_EQ(b.distance, 0.0);
  EXPECT_EQ(b.time_change.distance_to_identity(), 0.0);
}

TEST(Skorohod, ShiftedUnitJump) {
  for (double eps : {0.1, 0.01, 0.001}) {
    const StepPath a(0.0, {{1.0, 1.0}}, 3.0);
    const StepPath b(0.0, {{1.0 + eps, 1.0}}, 3.0);
    const auto r = skorohod_upper_distance(a, b);
    EXPECT_DOUBLE_EQ(r.distance, std::abs((1.0 + eps) - 1.0));
    EXPECT_DOUBLE_EQ(r.time_change.distance_to_identity(), r.distance);
    EXPECT_EQ(r.time_change(1.0), 1.0 + eps);
  }
}

TEST(Skorohod, MaxTimeDisplacement) {
  const StepPath a(0.0, {{1.0, 1.0}, {2.0, 2.0}}, 3.0);
  const StepPath b(0.0, {{1.1, 1.0}, {1.9, 2.0}}, 3.0);
  EXPECT_NEAR(skorohod_upper_distance(a, b).distance, 0.1, 1e-12);
}

TEST(Skorohod, ValueDiscrepancyCounts) {
  const StepPath a(0.0, {{1.0, 1.0}}, 3.0);
  const StepPath b(0.5, {{1.0, 1.25}}, 3.0);
  EXPECT_EQ(skorohod_upper_distance(a, b).distance, 0.5);
}

TEST(Skorohod, Errors) {
  const StepPath a(0.0, {{1.0, 1.0}}, 3.0);
  const StepPath b(0.0, {{1.0, 1.0}, {2.0, 2.0}}, 3.0);
  EXPECT_EQ(code_of([&] { skorohod_upper_distance(a, b); }), Errc::jump_count_mismatch);
  const PathVector coincident({a, StepPath(0.0, {{1.0, 5.0}}, 3.0)});
  const PathVector fine({a, StepPath(0.0, {{1.5, 5.0}}, 3.0)});
  EXPECT_EQ(code_of([&] { skorohod_upper_distance(coincident, fine); }), Errc::coincident_jumps);
}

TEST(Skorohod, SymmetricAndInverseTimeChange) {
  Rng rng(RngStream{1, 4});
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Jump> j1;
    std::vector<Jump> j2;
    double t1 = 0.0;
    double t2 = 0.0;
    for (int k = 0; k < 4; ++k) {
      t1 += 0.1 + 0.3 * rng.uniform01();
      t2 += 0.1 + 0.3 * rng.uniform01();
      const double v = std::floor(5.0 * rng.uniform01());
      j1.push_back({t1, v});
      j2.push_back({t2, v + (rng.uniform01() < 0.3 ? 0.5 : 0.0)});
    }
    const StepPath a(0.0, j1, 2.0);
    const StepPath b(0.0, j2, 2.0);
    const auto ab = skorohod_upper_distance(a, b);
    const auto ba = skorohod_upper_distance(b, a);
    EXPECT_EQ(ab.distance, ba.distance);
    EXPECT_EQ(ab.time_change.inverse(), ba.time_change);
  }
}

TEST(Skorohod, TimeReparameterizationBound) {
  Rng rng(RngStream{1, 5});
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_step(rng, 2.0, 6);
    std::vector<TimeChange::Knot> knots{{0.0, 0.0}};
    double prev = 0.0;
    for (double t : g.jump_times()) {
      const double room = std::min(t - prev, 2.0 - t) * 0.4;
      const double image = t + room * (2.0 * rng.uniform01() - 1.0);
      knots.push_back({t, std::max(image, std::nextafter(knots.back().image, INFINITY))});
      prev = t;
    }
    knots.push_back({2.0, 2.0});
    if (!g.jump_times().empty() && g.jump_times().back() == 2.0) knots.pop_back();
    const TimeChange lambda(knots);
    const StepPath moved = compose(g, lambda);
    EXPECT_LE(skorohod_upper_distance(g, moved).distance, lambda.distance_to_identity() + 1e-12);
  }
}

TEST(Skorohod, PerturbationFamiliesConverge) {
  const PathVector g({StepPath(0.0, {{0.5, 1.0}, {1.5, 2.0}}, 2.0), StepPath(1.0, {{1.0, 0.0}}, 2.0)});
  double last = INFINITY;
  for (int n = 1; n <= 1024; n *= 2) {
    const double e = 0.4 / n;
    const PathVector gn({StepPath(0.0, {{0.5 + e, 1.0}, {1.5 - e, 2.0}}, 2.0),
                         StepPath(1.0 + e, {{1.0 - e / 2, 0.0}}, 2.0)});
    const double d = skorohod_upper_distance(g, gn).distance;
    EXPECT_LE(d, last);
    EXPECT_LE(d, 1.0 / n);
    last = d;
  }
}

TEST(Skorohod, LeftLimitsAlongTimeChanges) {
  // x_N = x o lambda_N with ||lambda_N - Id|| <= 1/N, t_N -> t at a continuity point of x.
  const StepPath x(0.0, {{1.0, 1.0}, {2.0, 3.0}}, 4.0);
  for (double t : {0.5, 1.5, 3.0}) {
    for (int n = 4; n <= 4096; n *= 2) {
      const double d = 1.0 / n;
      const TimeChange lam({{0.0, 0.0}, {1.0, 1.0 + d}, {2.0, 2.0 - d}, {4.0, 4.0}});
      const StepPath xn = compose(x, lam);
      const double tn = t + d / 3.0;
      EXPECT_EQ(xn.eval_left(tn), x.eval(t)) << "t=" << t << " n=" << n;
    }
  }
}

TEST(UniformDistance, Examples) {
  const std::vector<double> a{1.0};
  const std::vector<double> b{1.0, 2.0};
  const auto p1 = StepPath::counting(a, 3.0);
  const auto p2 = StepPath::counting(b, 3.0);
  EXPECT_EQ(uniform_distance(p1, p1, 3.0), 0.0);
  EXPECT_EQ(uniform_distance(p1, p2, 3.0), 1.0);
  EXPECT_EQ(uniform_distance(p1, p2, 1.5), 0.0);
  EXPECT_EQ(code_of([&] { uniform_distance(p1, p2, 4.0); }), Errc::out_of_domain);
}

TEST(UniformDistance, DominatesSampledDifferences) {
  Rng rng(RngStream{1, 6});
  for (int rep = 0; rep < 50; ++rep) {
    const auto p1 = random_step(rng, 2.0, 6);
    const auto p2 = random_step(rng, 2.0, 6);
    const double d = uniform_distance(p1, p2, 2.0);
    for (int k = 0; k < 100; ++k) {
      const double t = 2.0 * rng.uniform01();
      EXPECT_GE(d, std::abs(p1.eval(t) - p2.eval(t)));
    }
  }
}
