#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ppconv/cadlag_paths.hpp"
#include "ppconv/error.hpp"
#include "ppconv/kernels.hpp"
#include "ppconv/poisson_measure.hpp"
#include "ppconv/thinning.hpp"

namespace ppconv {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next line that is neither blank nor a '#' comment.
  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.front() == '#') {
        last_comment_ = line;
        continue;
      }
      return line;
    }
    return std::nullopt;
  }

  std::string expect(std::string_view what) {
    auto line = next();
    if (!line) error("unexpected end of file, expected " + std::string(what));
    return *line;
  }

  [[noreturn]] void error(const std::string& msg) const {
    fail(Errc::parse, source_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  double number(std::string_view s, std::string_view what) const {
    try {
      return parse_number(s, what);
    } catch (const Error& e) {
      error(e.what());
    }
  }

  std::vector<double> row(const std::string& line, std::size_t width) const {
    auto cells = split(line, ',');
    if (cells.size() != width)
      error("expected " + std::to_string(width) + " fields, got " + std::to_string(cells.size()));
    std::vector<double> out;
    for (auto c : cells) out.push_back(number(c, "field"));
    return out;
  }

  const std::string& last_comment() const { return last_comment_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
  std::string last_comment_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Window CSV
//
//   # horizon=<T>,mark_bound=<M>
//   t,z[,u]
//   <t>,<z>[,<u>]
// ---------------------------------------------------------------------------

inline void write_window_csv(std::ostream& out, const PointMeasureWindow& w) {
  out << "# horizon=" << format_double(w.horizon()) << ",mark_bound=" << format_double(w.mark_bound())
      << '\n';
  out << (w.marked() ? "t,z,u\n" : "t,z\n");
  for (const Atom& a : w.atoms()) {
    out << format_double(a.t) << ',' << format_double(a.z);
    if (a.u) out << ',' << format_double(*a.u);
    out << '\n';
  }
}

/// Reads a window and re-validates every invariant, simplicity included.
/// Without the bounds comment, T and M default to the largest t and z.
inline PointMeasureWindow read_window_csv(std::istream& in, const std::string& source = "window") {
  detail::LineReader reader(in, source);
  const std::string header = reader.expect("header t,z[,u]");
  bool marked = false;
  if (header == "t,z,u")
    marked = true;
  else if (header != "t,z")
    reader.error("window header must be 't,z' or 't,z,u'");

  std::optional<double> horizon;
  std::optional<double> mark_bound;
  if (const std::string& c = reader.last_comment(); !c.empty()) {
    for (auto item : detail::split(std::string_view(c).substr(1), ',')) {
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = item.substr(0, eq);
      if (key == "horizon") horizon = reader.number(item.substr(eq + 1), "horizon");
      if (key == "mark_bound") mark_bound = reader.number(item.substr(eq + 1), "mark_bound");
    }
  }

  std::vector<Atom> atoms;
  double max_t = 0.0;
  double max_z = 0.0;
  while (auto line = reader.next()) {
    auto v = reader.row(*line, marked ? 3 : 2);
    Atom a{v[0], v[1], {}};
    if (marked) a.u = v[2];
    max_t = std::max(max_t, a.t);
    max_z = std::max(max_z, a.z);
    atoms.push_back(a);
  }
  try {
    return PointMeasureWindow(horizon.value_or(max_t), mark_bound.value_or(max_z), marked, std::move(atoms));
  } catch (const Error& e) {
    if (e.code() == Errc::non_simple) throw;
    reader.error(e.what());
  }
}

// ---------------------------------------------------------------------------
// Path CSV. First line is `kind,<step|grid|linear|decay>`, second `horizon,<T>`.
//
//   step:   t,value rows; the first row is 0,<initial value>
//   grid:   h,<step> then one value per row
//   linear: t,value knot rows
//   decay:  base,<b> / rate,<r> then start,amplitude rows
// ---------------------------------------------------------------------------

inline void write_path_csv(std::ostream& out, const StepPath& p) {
  out << "kind,step\nhorizon," << format_double(p.horizon()) << "\nt,value\n";
  out << "0," << format_double(p.initial_value()) << '\n';
  for (const Jump& j : p.jumps()) out << format_double(j.time) << ',' << format_double(j.value) << '\n';
}

inline void write_path_csv(std::ostream& out, const GridPath& p) {
  out << "kind,grid\nhorizon," << format_double(p.horizon()) << "\nh," << format_double(p.step())
      << "\nvalue\n";
  for (double v : p.values()) out << format_double(v) << '\n';
}

inline void write_path_csv(std::ostream& out, const LinearPath& p) {
  out << "kind,linear\nhorizon," << format_double(p.horizon()) << "\nt,value\n";
  for (const auto& k : p.knots()) out << format_double(k.t) << ',' << format_double(k.value) << '\n';
}

inline void write_path_csv(std::ostream& out, const DecayPath& p) {
  out << "kind,decay\nhorizon," << format_double(p.horizon()) << "\nbase," << format_double(p.base())
      << "\nrate," << format_double(p.rate()) << "\nstart,amplitude\n";
  for (const auto& s : p.segments())
    out << format_double(s.start) << ',' << format_double(s.amplitude) << '\n';
}

inline void write_path_csv(std::ostream& out, const Intensity& p) {
  std::visit([&](const auto& x) { write_path_csv(out, x); }, p);
}

inline Intensity read_path_csv(std::istream& in, const std::string& source = "path") {
  detail::LineReader reader(in, source);
  auto keyed = [&](std::string_view key) {
    const std::string line = reader.expect(key);
    auto cells = detail::split(line, ',');
    if (cells.size() != 2 || cells[0] != key) reader.error("expected '" + std::string(key) + ",<value>'");
    return std::string(cells[1]);
  };
  const std::string kind = keyed("kind");
  const double horizon = reader.number(keyed("horizon"), "horizon");

  try {
    if (kind == "step") {
      if (reader.expect("header t,value") != "t,value") reader.error("expected header 't,value'");
      auto first = reader.row(reader.expect("initial value row"), 2);
      if (first[0] != 0.0) reader.error("first step row must be at t = 0");
      std::vector<Jump> jumps;
      while (auto line = reader.next()) {
        auto v = reader.row(*line, 2);
        jumps.push_back({v[0], v[1]});
      }
      return StepPath(first[1], std::move(jumps), horizon);
    }
    if (kind == "grid") {
      const double step = reader.number(keyed("h"), "h");
      if (reader.expect("header value") != "value") reader.error("expected header 'value'");
      std::vector<double> values;
      while (auto line = reader.next()) values.push_back(reader.row(*line, 1)[0]);
      return GridPath(step, std::move(values), horizon);
    }
    if (kind == "linear") {
      if (reader.expect("header t,value") != "t,value") reader.error("expected header 't,value'");
      std::vector<LinearPath::Knot> knots;
      while (auto line = reader.next()) {
        auto v = reader.row(*line, 2);
        knots.push_back({v[0], v[1]});
      }
      LinearPath p(std::move(knots));
      if (p.horizon() != horizon) reader.error("last knot must sit at the horizon");
      return p;
    }
    if (kind == "decay") {
      const double base = reader.number(keyed("base"), "base");
      const double rate = reader.number(keyed("rate"), "rate");
      if (reader.expect("header start,amplitude") != "start,amplitude")
        reader.error("expected header 'start,amplitude'");
      std::vector<DecayPath::Segment> segs;
      while (auto line = reader.next()) {
        auto v = reader.row(*line, 2);
        segs.push_back({v[0], v[1]});
      }
      return DecayPath(base, rate, std::move(segs), horizon);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::parse) throw;
    reader.error(e.what());
  }
  reader.error("unknown path kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Key-value config: `key=value` lines, '#' comments, optional [section]
// headers (sections only group keys for readability).
// ---------------------------------------------------------------------------

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "config") {
    KeyValueConfig cfg;
    cfg.source_ = source;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      if (line[first] == '[') {
        if (line.find(']') == std::string::npos)
          fail(Errc::parse, source + ":" + std::to_string(line_no) + ": unterminated section header");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        fail(Errc::parse, source + ":" + std::to_string(line_no) + ": expected key=value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(Errc::parse, source + ":" + std::to_string(line_no) + ": empty key");
      cfg.entries_[key] = {std::move(value), line_no};
    }
    return cfg;
  }

  void set(const std::string& key, std::string value) { entries_[key] = {std::move(value), 0}; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      if (fallback) return *fallback;
      fail(Errc::parse, source_ + ": missing required key '" + key + "'");
    }
    return it->second.value;
  }

  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      if (fallback) return *fallback;
      fail(Errc::parse, source_ + ": missing required key '" + key + "'");
    }
    try {
      return detail::parse_number(it->second.value, key);
    } catch (const Error& e) {
      fail(Errc::parse, where(it->second) + "key '" + key + "': " + e.what());
    }
  }

  long long get_int(const std::string& key, std::optional<long long> fallback = std::nullopt) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      if (fallback) return *fallback;
      fail(Errc::parse, source_ + ": missing required key '" + key + "'");
    }
    const std::string& s = it->second.value;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(Errc::parse, where(it->second) + "key '" + key + "': '" + s + "' is not an integer");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& s = it->second.value;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(Errc::parse, where(it->second) + "key '" + key + "': '" + s + "' is not a boolean");
  }

  template <class T, class Parse>
  std::vector<T> get_list(const std::string& key, Parse parse) const {
    std::vector<T> out;
    auto it = entries_.find(key);
    if (it == entries_.end()) return out;
    if (it->second.value.empty()) return out;
    for (auto item : detail::split(it->second.value, ',')) {
      try {
        out.push_back(parse(item));
      } catch (const Error& e) {
        fail(Errc::parse, where(it->second) + "key '" + key + "': " + e.what());
      }
    }
    return out;
  }

  std::map<std::string, std::string> entries() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : entries_) out[k] = v.value;
    return out;
  }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  std::string where(const Entry& e) const {
    return e.line ? source_ + ":" + std::to_string(e.line) + ": " : source_ + ": ";
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace ppconv
