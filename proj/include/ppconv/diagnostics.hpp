#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ppconv/cadlag_paths.hpp"
#include "ppconv/error.hpp"
#include "ppconv/models.hpp"
#include "ppconv/parallel.hpp"
#include "ppconv/rng.hpp"

namespace ppconv {

struct SampleSet {
  std::vector<double> values;
  std::string label;
};

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|,
/// evaluated after each block of tied values so integer samples are exact.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), Errc::empty_sample, "KS statistic needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    const double v = std::min(i < x.size() ? x[i] : INFINITY, j < y.size() ? y[j] : INFINITY);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

inline double ks_statistic(const SampleSet& a, const SampleSet& b) { return ks_statistic(a.values, b.values); }

/// Wasserstein-1 distance between empirical laws, int |F_a - F_b| dx; for
/// equal sizes this is the mean absolute difference of the sorted samples.
inline double wasserstein1(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), Errc::empty_sample, "Wasserstein distance needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double v = std::min(i < x.size() ? x[i] : INFINITY, j < y.size() ? y[j] : INFINITY);
    total += std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m) * (v - prev);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    prev = v;
  }
  return total;
}

/// Two-sample KS critical value c(alpha) sqrt((n+m)/(n m)) with
/// c(alpha) = sqrt(-ln(alpha/2) / 2).
inline double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  require(n > 0 && m > 0, Errc::empty_sample, "KS band needs nonempty samples");
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const auto nd = static_cast<double>(n);
  const auto md = static_cast<double>(m);
  return c * std::sqrt((nd + md) / (nd * md));
}

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MeanAndError mean_and_error(std::span<const double> v) {
  require(v.size() >= 2, Errc::empty_sample, "standard error needs at least two values");
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Stream id for replicate r of the experiment at size N.
constexpr std::uint64_t replicate_stream_id(std::uint64_t n, std::uint64_t replicate) noexcept {
  return derive_stream_id(derive_stream_id(0x7261746563757276ULL, n), replicate);
}

struct RateRow {
  int n = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  int replicates = 0;

  friend bool operator==(const RateRow&, const RateRow&) = default;
};

struct RateCurve {
  std::vector<RateRow> rows;

  void validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].replicates >= 2, Errc::invalid_argument, "rate rows need >= 2 replicates");
      require(rows[i].mean_error >= 0.0 && rows[i].std_error >= 0.0, Errc::invalid_argument,
              "rate rows need nonnegative errors");
      require(i == 0 || rows[i - 1].n < rows[i].n, Errc::invalid_argument, "N must increase across rows");
    }
  }

  friend bool operator==(const RateCurve&, const RateCurve&) = default;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline void validate_n_list(std::span<const int> n_list) {
  require(!n_list.empty(), Errc::invalid_argument, "N list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    require(n_list[i] >= 1, Errc::invalid_argument, "N values must be >= 1");
    require(i == 0 || n_list[i - 1] < n_list[i], Errc::invalid_argument, "N list must be strictly increasing");
  }
}

/// For each N: mean and standard error over replicates of
/// sup_{t <= T} |Z^{N,1}_t - Z-bar^1_t| from the coupled simulation.
/// Replicate r at size N draws from stream replicate_stream_id(N, r) of the
/// config's master seed.
inline RateCurve coupling_error_curve(const HawkesMeanFieldConfig& base, std::span<const int> n_list,
                                      int replicates, unsigned jobs = default_jobs()) {
  validate_n_list(n_list);
  require(replicates >= 2, Errc::invalid_argument, "replicates must be >= 2");
  const auto reps = static_cast<std::size_t>(replicates);
  std::vector<double> errors(n_list.size() * reps);
  parallel_for(errors.size(), jobs, [&](std::size_t idx) {
    const std::size_t row = idx / reps;
    const std::size_t r = idx % reps;
    HawkesMeanFieldConfig c = base;
    c.particles = n_list[row];
    c.observed = 1;
    c.seed = RngStream{base.seed.master_seed,
                       replicate_stream_id(static_cast<std::uint64_t>(n_list[row]), r)};
    const SimulationOutput out = simulate_hawkes_coupled(c);
    errors[idx] = uniform_distance(out.counting_paths[0], (*out.limit_counting_paths)[0], c.horizon);
  });
  RateCurve curve;
  for (std::size_t row = 0; row < n_list.size(); ++row) {
    const auto stats = mean_and_error(std::span<const double>(errors).subspan(row * reps, reps));
    curve.rows.push_back({n_list[row], stats.mean, stats.std_error, replicates});
  }
  return curve;
}

/// Ordinary least squares of log(mean_error) on log(N).
inline RateFit fit_rate(const RateCurve& curve) {
  curve.validate();
  require(curve.rows.size() >= 3, Errc::invalid_argument, "rate fit needs at least three rows");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const RateRow& r : curve.rows) {
    require(r.mean_error > 0.0, Errc::degenerate_fit,
            "mean error is zero at N = " + std::to_string(r.n) +
                "; the coupling is exact and there is no rate to fit");
    lx.push_back(std::log(static_cast<double>(r.n)));
    ly.push_back(std::log(r.mean_error));
  }
  const auto k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

struct MarginalRow {
  int n = 0;
  double t = 0.0;
  double ks = 0.0;
  double wasserstein = 0.0;
};

struct MarginalReport {
  std::vector<MarginalRow> rows;
  std::vector<double> null_ks;  // per time: limit sample vs an independent limit sample
  double band_99 = 0.0;         // two-sample KS 99% critical value for the replicate counts
};

/// Compares the law of Z^{N,1}_t with that of Z-bar^1_t at fixed times.
/// Each N gets `replicates` prelimit runs; the limit side is one sample of
/// `replicates` runs, and a second independent limit sample calibrates the
/// null level.
inline MarginalReport marginal_report(const MeanFieldDiffusiveConfig& base, std::span<const int> n_list,
                                      std::span<const double> times, int replicates, double limit_step = 0.01,
                                      unsigned jobs = default_jobs()) {
  validate_n_list(n_list);
  require(replicates >= 50, Errc::invalid_argument, "marginal report needs >= 50 replicates");
  require(!times.empty(), Errc::invalid_argument, "marginal report needs at least one time");
  for (double t : times)
    require(t > 0.0 && t <= base.horizon, Errc::invalid_argument, "marginal times must lie in (0, T]");
  const auto reps = static_cast<std::size_t>(replicates);
  const std::size_t nt = times.size();

  // Slots: [limit | null limit | N_0 | N_1 | ...], each reps x nt.
  const std::size_t groups = 2 + n_list.size();
  std::vector<double> samples(groups * reps * nt);
  parallel_for(groups * reps, jobs, [&](std::size_t idx) {
    const std::size_t group = idx / reps;
    const std::size_t r = idx % reps;
    double* slot = &samples[idx * nt];
    if (group < 2) {
      MeanFieldLimitConfig lc;
      lc.alpha = base.alpha;
      lc.horizon = base.horizon;
      lc.step = limit_step;
      lc.observed = 1;
      lc.seed = RngStream{base.seed.master_seed, replicate_stream_id(group == 0 ? 0 : 0xffffffffULL, r)};
      const SimulationOutput out = simulate_meanfield_limit(lc);
      for (std::size_t q = 0; q < nt; ++q) slot[q] = out.counting_paths[0].eval(times[q]);
    } else {
      MeanFieldDiffusiveConfig c = base;
      c.particles = n_list[group - 2];
      c.observed = 1;
      c.seed = RngStream{base.seed.master_seed,
                         replicate_stream_id(static_cast<std::uint64_t>(c.particles), r)};
      const SimulationOutput out = simulate_meanfield_prelimit(c);
      for (std::size_t q = 0; q < nt; ++q) slot[q] = out.counting_paths[0].eval(times[q]);
    }
  });

  auto column = [&](std::size_t group, std::size_t q) {
    std::vector<double> v(reps);
    for (std::size_t r = 0; r < reps; ++r) v[r] = samples[(group * reps + r) * nt + q];
    return v;
  };

  MarginalReport rep;
  rep.band_99 = ks_critical_value(reps, reps, 0.01);
  for (std::size_t q = 0; q < nt; ++q) rep.null_ks.push_back(ks_statistic(column(0, q), column(1, q)));
  for (std::size_t g = 0; g < n_list.size(); ++g) {
    for (std::size_t q = 0; q < nt; ++q) {
      const auto pre = column(2 + g, q);
      const auto lim = column(0, q);
      rep.rows.push_back({n_list[g], times[q], ks_statistic(pre, lim), wasserstein1(pre, lim)});
    }
  }
  return rep;
}

}  // namespace ppconv
