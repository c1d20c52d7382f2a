#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ppconv/cadlag_paths.hpp"
#include "ppconv/error.hpp"
#include "ppconv/poisson_measure.hpp"

namespace ppconv {

using Intensity = std::variant<StepPath, GridPath, LinearPath, DecayPath>;

inline double horizon_of(const Intensity& x) {
  return std::visit([](const auto& p) { return p.horizon(); }, x);
}

/// Intensities x^1..x^m paired with point measures pi^1..pi^m, observed on [0, T].
struct ThinningInput {
  std::vector<Intensity> intensities;
  std::vector<PointMeasureWindow> measures;
  double horizon = 0.0;

  void validate() const {
    require(!intensities.empty(), Errc::invalid_argument, "thinning needs at least one component");
    require(intensities.size() == measures.size(), Errc::invalid_argument,
            "intensity and measure counts differ");
    require(horizon >= 0.0, Errc::invalid_argument, "thinning horizon must be nonnegative");
    for (std::size_t j = 0; j < intensities.size(); ++j) {
      const std::string tag = "component " + std::to_string(j);
      require(horizon_of(intensities[j]) >= horizon && measures[j].horizon() >= horizon,
              Errc::invalid_argument, tag + ": horizon shorter than the thinning horizon");
      const auto [lo, hi] =
          std::visit([&](const auto& p) { return p.range(horizon); }, intensities[j]);
      require(lo >= 0.0, Errc::invalid_argument, tag + ": intensity takes negative values");
      require(measures[j].mark_bound() >= hi, Errc::mark_bound,
              tag + ": mark bound " + std::to_string(measures[j].mark_bound()) +
                  " below intensity supremum " + std::to_string(hi));
    }
  }
};

/// Counting path of the atoms (tau, zeta) of w with tau <= T and
/// zeta <= x(tau-). At tau = 0 the value x(0) stands in for the left limit.
template <CadlagPath P>
StepPath thin(const P& intensity, const PointMeasureWindow& w, double horizon) {
  std::vector<double> accepted;
  for (const Atom& a : w.atoms()) {
    if (a.t > horizon) break;
    const double level = a.t > 0.0 ? intensity.eval_left(a.t) : intensity.eval(0.0);
    if (a.z <= level) accepted.push_back(a.t);
  }
  return StepPath::counting(accepted, horizon);
}

inline StepPath thin(const Intensity& intensity, const PointMeasureWindow& w, double horizon) {
  return std::visit([&](const auto& p) { return thin(p, w, horizon); }, intensity);
}

inline PathVector phi(const ThinningInput& in) {
  in.validate();
  std::vector<StepPath> out;
  out.reserve(in.intensities.size());
  for (std::size_t j = 0; j < in.intensities.size(); ++j)
    out.push_back(thin(in.intensities[j], in.measures[j], in.horizon));
  return PathVector(std::move(out));
}

struct AtomRef {
  std::size_t measure = 0;
  double t = 0.0;
  double z = 0.0;

  friend bool operator==(const AtomRef&, const AtomRef&) = default;
};

/// Which of the four sufficient conditions for continuity of the thinning
/// map hold at the given input, with the offending atoms.
struct ContinuityReport {
  bool condition_a = true;  // each measure has at most one atom per time
  bool condition_b = true;  // no time carries atoms of two measures
  bool condition_c = true;  // intensity j is continuous at each atom time of measure j
  bool condition_d = true;  // no atom sits exactly on the graph of t -> x^j(t-)
  std::vector<AtomRef> violations_a;
  std::vector<AtomRef> violations_b;
  std::vector<AtomRef> violations_c;
  std::vector<AtomRef> violations_d;

  bool all() const noexcept { return condition_a && condition_b && condition_c && condition_d; }
};

inline ContinuityReport check_conditions(const ThinningInput& in) {
  in.validate();
  ContinuityReport rep;
  std::vector<AtomRef> all_atoms;
  for (std::size_t j = 0; j < in.measures.size(); ++j) {
    std::vector<AtomRef> own;
    for (const Atom& a : in.measures[j].atoms())
      if (a.t <= in.horizon) own.push_back({j, a.t, a.z});

    for (std::size_t i = 1; i < own.size(); ++i)
      if (own[i].t == own[i - 1].t) {
        rep.violations_a.push_back(own[i - 1]);
        rep.violations_a.push_back(own[i]);
      }

    std::visit(
        [&](const auto& x) {
          for (const AtomRef& a : own) {
            if (!x.is_continuous_at(a.t)) rep.violations_c.push_back(a);
            const double level = a.t > 0.0 ? x.eval_left(a.t) : x.eval(0.0);
            if (a.z == level) rep.violations_d.push_back(a);
          }
        },
        in.intensities[j]);
    all_atoms.insert(all_atoms.end(), own.begin(), own.end());
  }

  std::stable_sort(all_atoms.begin(), all_atoms.end(),
                   [](const AtomRef& a, const AtomRef& b) { return a.t < b.t; });
  for (std::size_t i = 0; i < all_atoms.size();) {
    std::size_t k = i + 1;
    while (k < all_atoms.size() && all_atoms[k].t == all_atoms[i].t) ++k;
    bool shared = false;
    for (std::size_t q = i + 1; q < k; ++q) shared |= all_atoms[q].measure != all_atoms[i].measure;
    if (shared) rep.violations_b.insert(rep.violations_b.end(), all_atoms.begin() + i, all_atoms.begin() + k);
    i = k;
  }

  rep.condition_a = rep.violations_a.empty();
  rep.condition_b = rep.violations_b.empty();
  rep.condition_c = rep.violations_c.empty();
  rep.condition_d = rep.violations_d.empty();
  return rep;
}

/// The x^n of the standard discontinuity witness: 1 everywhere except a
/// tent dipping linearly to 1 - 1/n at t = 1 on [1/2, 3/2].
inline LinearPath tent_dip_path(int n, double horizon) {
  require(n >= 1, Errc::invalid_argument, "tent index must be >= 1");
  require(horizon > 1.5, Errc::invalid_argument, "tent path needs a horizon beyond 3/2");
  const double depth = 1.0 - 1.0 / static_cast<double>(n);
  return LinearPath({{0.0, 1.0}, {0.5, 1.0}, {1.0, depth}, {1.5, 1.0}, {horizon, 1.0}});
}

}  // namespace ppconv
