#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ppconv/diagnostics.hpp"
#include "ppconv/io.hpp"
#include "ppconv/models.hpp"

namespace ppconv {

inline constexpr std::uint64_t default_seed = 20240611;

/// Keys every model accepts; the rest are model specific.
inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys{"model", "seed", "experiment", "n_list", "replicates", "times"};
  return keys;
}

inline const std::set<std::string>& model_keys(const std::string& model) {
  static const std::set<std::string> meanfield{"alpha", "N", "T", "n_obs", "h", "strip_height"};
  static const std::set<std::string> volterra{"gamma", "N", "T", "mu", "h", "feedback", "max_bound", "strip_height"};
  static const std::set<std::string> hawkes{"kernel", "f", "N", "T", "n_obs", "h", "max_bound", "strip_height"};
  if (model == "meanfield") return meanfield;
  if (model == "volterra") return volterra;
  if (model == "hawkes") return hawkes;
  fail(Errc::parse, "model must be meanfield, volterra or hawkes, got '" + model + "'");
}

/// Rejects keys that the selected model does not read.
inline void check_keys(const KeyValueConfig& cfg) {
  const std::string model = cfg.get_string("model");
  const auto& allowed = model_keys(model);
  for (const auto& [key, value] : cfg.entries())
    if (!common_keys().count(key) && !allowed.count(key))
      fail(Errc::parse, "unknown key '" + key + "' for model " + model);
}

inline std::uint64_t config_seed(const KeyValueConfig& cfg) {
  const long long s = cfg.get_int("seed", static_cast<long long>(default_seed));
  require(s >= 0, Errc::parse, "seed must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

namespace detail {

inline int positive_int(const KeyValueConfig& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.get_int(key, fallback);
  require(v >= 1 && v <= 1'000'000'000, Errc::invalid_argument, key + " must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace detail

inline MeanFieldDiffusiveConfig meanfield_config(const KeyValueConfig& cfg, const RngStream& seed) {
  MeanFieldDiffusiveConfig c;
  c.alpha = cfg.get_double("alpha", 1.0);
  c.particles = detail::positive_int(cfg, "N", 100);
  c.horizon = cfg.get_double("T", 1.0);
  c.observed = detail::positive_int(cfg, "n_obs", 1);
  c.strip_height = cfg.get_double("strip_height", 1.0);
  c.seed = seed;
  c.validate();
  return c;
}

inline MeanFieldLimitConfig meanfield_limit_config(const KeyValueConfig& cfg, const RngStream& seed) {
  const auto pre = meanfield_config(cfg, seed);
  MeanFieldLimitConfig c;
  c.alpha = pre.alpha;
  c.horizon = pre.horizon;
  c.step = cfg.get_double("h", 0.01);
  c.observed = pre.observed;
  c.seed = seed;
  return c;
}

inline VolterraConfig volterra_config(const KeyValueConfig& cfg, const RngStream& seed) {
  VolterraConfig c;
  c.gamma = cfg.get_double("gamma", 1.0);
  c.scale = detail::positive_int(cfg, "N", 10);
  c.horizon = cfg.get_double("T", 1.0);
  c.baseline = cfg.get_double("mu", 1.0);
  c.step = cfg.get_double("h", 0.01);
  c.feedback = cfg.get_bool("feedback", true);
  c.max_mark_bound = cfg.get_double("max_bound", 1e6);
  c.strip_height = cfg.get_double("strip_height", 1.0);
  c.seed = seed;
  c.validate();
  return c;
}

inline HawkesMeanFieldConfig hawkes_config(const KeyValueConfig& cfg, const RngStream& seed) {
  HawkesMeanFieldConfig c;
  c.kernel = Kernel::parse(cfg.get_string("kernel", std::string("exp:1")));
  c.rate = RateFunction::parse(cfg.get_string("f", std::string("affine:1,0.5")));
  c.particles = detail::positive_int(cfg, "N", 100);
  c.horizon = cfg.get_double("T", 5.0);
  c.observed = detail::positive_int(cfg, "n_obs", 1);
  c.step = cfg.get_double("h", 0.01);
  c.max_mark_bound = cfg.get_double("max_bound", 1e6);
  c.strip_height = cfg.get_double("strip_height", 1.0);
  c.seed = seed;
  c.validate();
  return c;
}

inline std::vector<int> parse_n_list(std::string_view text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (auto item : detail::split(text, ',')) {
    const double v = detail::parse_number(item, "N list entry");
    require(v == std::floor(v) && v >= 1 && v <= 1e9, Errc::invalid_argument,
            "N list entries must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline std::vector<double> parse_times(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (auto item : detail::split(text, ',')) out.push_back(detail::parse_number(item, "time"));
  return out;
}

}  // namespace ppconv
