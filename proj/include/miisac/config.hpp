#pragma once

// Run configuration: JSON file -> SweepSpec, and SweepSpec -> resolved JSON.
//
// {
//   "link":  {"coil_radius_m": 0.15, "coil_turns": 20, "f0_hz": 1e4, "z_ref_ohm": 50,
//             "p_tx_dbm": 0 | "p_tx_w": 1e-3, "pilots": 100, "bandwidth_hz": 1e3,
//             "temp_k": 290},
//   "theta": {"r_m": 10, "sigma_s_per_m": 0.01},
//   "sweep": {"axis": "range" | "conductivity" | "pilots",
//             "values": [...] | "log": [start, stop, count]},
//   "media": ["dry_soil", 0.05, ...],
//   "mle":   {"r_bounds_m": [lo, hi], "sigma_bounds_s_per_m": [lo, hi],
//             "starts_per_axis": 4, "simplex_tol": 1e-10, "max_iters": 2000},
//   "mc":    {"trials": 1000, "seed": 1},
//   "convergence_threshold": 0.99
// }
//
// The quantity swept by "sweep.axis" may not also be fixed elsewhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "miisac/errors.hpp"
#include "miisac/estimation.hpp"
#include "miisac/physics.hpp"

namespace miisac {

enum class Axis { range, conductivity, pilots };

inline std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::range: return "range";
    case Axis::conductivity: return "conductivity";
    case Axis::pilots: return "pilots";
  }
  return "?";
}

struct McSettings {
  int trials = 1000;
  std::uint64_t seed = 1;
};

struct SweepSpec {
  Axis axis = Axis::range;
  std::vector<double> values;
  LinkConfig link;
  Theta theta;  // the swept component is ignored
  std::vector<Medium> media;
  MleConfig mle;
  std::optional<McSettings> mc;
  double convergence_threshold = 0.99;
};

/// n log-spaced values from start to stop inclusive.
inline std::vector<double> log_space(double start, double stop, int count) {
  if (!(start > 0.0) || !(stop > 0.0) || count < 1)
    throw ConfigError("log spacing needs positive start/stop and count >= 1");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {start};
  const double a = std::log(start);
  const double b = std::log(stop);
  for (int i = 0; i < count; ++i) {
    if (i == count - 1) {
      v.push_back(stop);
      break;
    }
    v.push_back(std::exp(a + (b - a) * i / (count - 1)));
  }
  return v;
}

namespace detail {

using json = nlohmann::json;

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("config field '" + path_ + "': expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const char* key, const std::string& msg) const {
    throw ConfigError("config field '" + where(key) + "': " + msg);
  }

  double positive(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!(d > 0.0) || !std::isfinite(d)) fail(key, "must be a finite number > 0");
    return d;
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  int integer_at_least(const char* key, int fallback, int min) const {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto i = v.get<std::int64_t>();
    if (i < min || i > 1'000'000'000) fail(key, "must be an integer >= " + std::to_string(min));
    return static_cast<int>(i);
  }

  Bounds bounds(const char* key, Bounds fallback) const {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(key, "expected [lo, hi]");
    Bounds b{v[0].get<double>(), v[1].get<double>()};
    if (!(b.lo > 0.0) || !(b.hi > b.lo) || !std::isfinite(b.hi)) fail(key, "need 0 < lo < hi");
    return b;
  }

  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& [k, _] : obj_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw ConfigError("config field '" + where(k.c_str()) + "': unknown field");
    }
  }

  const json& at(const char* key) const { return obj_.at(key); }

 private:
  const json& obj_;
  std::string path_;
};

inline Medium parse_medium(const json& v, std::size_t index) {
  const std::string where = "media[" + std::to_string(index) + "]";
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (auto m = find_medium(name)) return *m;
    throw ConfigError("config field '" + where + "': unknown medium preset '" + name + "'");
  }
  if (v.is_number()) {
    const double s = v.get<double>();
    if (!(s > 0.0) || !std::isfinite(s))
      throw ConfigError("config field '" + where + "': conductivity must be > 0");
    return {"custom", s};
  }
  throw ConfigError("config field '" + where + "': expected a preset name or a conductivity");
}

}  // namespace detail

/// Defaults used when the config leaves "sweep" or "media" out.
struct SweepDefaults {
  Axis axis = Axis::range;
  std::vector<double> values;
  std::vector<Medium> media;
};

inline SweepDefaults command_defaults(std::string_view command) {
  SweepDefaults d;
  if (command == "mle") {
    d.values = {10.0};
    d.media = {*find_medium("typical_soil")};
  } else if (command == "penalty") {
    d.values = log_space(0.5, 30.0, 40);
    d.media = medium_presets();
  } else {
    d.values = log_space(1.0, 30.0, 30);
    d.media = medium_presets();
  }
  return d;
}

inline SweepSpec parse_sweep_spec(const nlohmann::json& doc, std::string_view command = "crb") {
  using detail::FieldReader;
  const FieldReader top(doc, "");
  top.only({"command", "link", "theta", "sweep", "media", "mle", "mc", "convergence_threshold"});

  SweepSpec spec;
  const SweepDefaults defaults = command_defaults(command);
  spec.axis = defaults.axis;
  spec.values = defaults.values;

  bool pilots_fixed = false;
  bool r_fixed = false;
  bool sigma_fixed = false;

  if (top.has("link")) {
    const FieldReader link(top.at("link"), "link");
    link.only({"coil_radius_m", "coil_turns", "f0_hz", "z_ref_ohm", "p_tx_dbm", "p_tx_w", "pilots",
               "bandwidth_hz", "temp_k"});
    LinkConfig& c = spec.link;
    c.coil.radius_a = link.positive("coil_radius_m", c.coil.radius_a);
    c.coil.turns_n = link.integer_at_least("coil_turns", c.coil.turns_n, 1);
    c.f0 = link.positive("f0_hz", c.f0);
    c.z_ref = link.positive("z_ref_ohm", c.z_ref);
    if (link.has("p_tx_dbm") && link.has("p_tx_w"))
      link.fail("p_tx_w", "give either p_tx_dbm or p_tx_w, not both");
    if (link.has("p_tx_dbm")) {
      const double dbm = link.number("p_tx_dbm", 0.0);
      if (!std::isfinite(dbm)) link.fail("p_tx_dbm", "must be finite");
      c.p_tx = dbm_to_watts(dbm);
    }
    c.p_tx = link.positive("p_tx_w", c.p_tx);
    pilots_fixed = link.has("pilots");
    c.pilots_l = link.integer_at_least("pilots", c.pilots_l, 1);
    c.bandwidth_b = link.positive("bandwidth_hz", c.bandwidth_b);
    c.temp_t0 = link.positive("temp_k", c.temp_t0);
  }

  if (top.has("theta")) {
    const FieldReader th(top.at("theta"), "theta");
    th.only({"r_m", "sigma_s_per_m"});
    r_fixed = th.has("r_m");
    sigma_fixed = th.has("sigma_s_per_m");
    spec.theta.r = th.positive("r_m", spec.theta.r);
    spec.theta.sigma_m = th.positive("sigma_s_per_m", spec.theta.sigma_m);
  }

  if (top.has("sweep")) {
    const FieldReader sw(top.at("sweep"), "sweep");
    sw.only({"axis", "values", "log"});
    if (!sw.has("axis") || !sw.at("axis").is_string()) sw.fail("axis", "expected range, conductivity or pilots");
    const auto axis = sw.at("axis").get<std::string>();
    if (axis == "range") spec.axis = Axis::range;
    else if (axis == "conductivity") spec.axis = Axis::conductivity;
    else if (axis == "pilots") spec.axis = Axis::pilots;
    else sw.fail("axis", "unknown axis '" + axis + "'");

    if (sw.has("values") == sw.has("log")) sw.fail("values", "give exactly one of 'values' or 'log'");
    spec.values.clear();
    if (sw.has("values")) {
      const auto& vs = sw.at("values");
      if (!vs.is_array() || vs.empty()) sw.fail("values", "expected a non-empty array");
      for (std::size_t i = 0; i < vs.size(); ++i) {
        if (!vs[i].is_number() || !(vs[i].get<double>() > 0.0) || !std::isfinite(vs[i].get<double>()))
          sw.fail("values", "element " + std::to_string(i) + " must be a positive number");
        spec.values.push_back(vs[i].get<double>());
      }
    } else {
      const auto& lg = sw.at("log");
      if (!lg.is_array() || lg.size() != 3 || !lg[0].is_number() || !lg[1].is_number() ||
          !lg[2].is_number_integer())
        sw.fail("log", "expected [start, stop, count]");
      spec.values = log_space(lg[0].get<double>(), lg[1].get<double>(), lg[2].get<int>());
    }
  }

  if (spec.axis == Axis::pilots) {
    std::vector<double> rounded;
    for (double v : spec.values) {
      const double l = std::max(1.0, std::round(v));
      if (rounded.empty() || rounded.back() != l) rounded.push_back(l);
    }
    spec.values = std::move(rounded);
  }

  if (spec.axis == Axis::range && r_fixed)
    throw ConfigError("config field 'theta.r_m': range is the sweep axis and cannot also be fixed");
  if (spec.axis == Axis::pilots && pilots_fixed)
    throw ConfigError("config field 'link.pilots': pilots is the sweep axis and cannot also be fixed");
  if (spec.axis == Axis::conductivity && (sigma_fixed || top.has("media")))
    throw ConfigError(std::string("config field '") + (sigma_fixed ? "theta.sigma_s_per_m" : "media") +
                      "': conductivity is the sweep axis and cannot also be fixed");

  if (spec.axis != Axis::conductivity && sigma_fixed && top.has("media"))
    throw ConfigError("config field 'media': conflicts with theta.sigma_s_per_m; give one or the other");

  if (spec.axis == Axis::conductivity) {
    spec.media = {{"swept", 0.0}};
  } else if (top.has("media")) {
    const auto& ms = top.at("media");
    if (!ms.is_array() || ms.empty()) throw ConfigError("config field 'media': expected a non-empty array");
    for (std::size_t i = 0; i < ms.size(); ++i) spec.media.push_back(detail::parse_medium(ms[i], i));
  } else if (sigma_fixed) {
    spec.media = {{"custom", spec.theta.sigma_m}};
  } else {
    spec.media = defaults.media;
  }

  if (top.has("mle")) {
    const FieldReader m(top.at("mle"), "mle");
    m.only({"r_bounds_m", "sigma_bounds_s_per_m", "starts_per_axis", "simplex_tol", "max_iters"});
    spec.mle.r_bounds = m.bounds("r_bounds_m", spec.mle.r_bounds);
    spec.mle.sigma_bounds = m.bounds("sigma_bounds_s_per_m", spec.mle.sigma_bounds);
    spec.mle.starts_per_axis = m.integer_at_least("starts_per_axis", spec.mle.starts_per_axis, 1);
    spec.mle.simplex_tol = m.positive("simplex_tol", spec.mle.simplex_tol);
    spec.mle.max_iters = m.integer_at_least("max_iters", spec.mle.max_iters, 1);
  }

  if (top.has("mc")) {
    const FieldReader mc(top.at("mc"), "mc");
    mc.only({"trials", "seed"});
    McSettings s;
    s.trials = mc.integer_at_least("trials", s.trials, 1);
    if (mc.has("seed")) {
      const auto& v = mc.at("seed");
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned()))
        mc.fail("seed", "expected a non-negative 64-bit integer");
      s.seed = v.get<std::uint64_t>();
    }
    spec.mc = s;
  } else if (command == "mle") {
    spec.mc = McSettings{};
  }

  if (top.has("convergence_threshold")) {
    const double t = top.number("convergence_threshold", 0.99);
    if (!(t >= 0.0 && t <= 1.0)) top.fail("convergence_threshold", "must lie in [0, 1]");
    spec.convergence_threshold = t;
  }

  try {
    validate(spec.link);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return spec;
}

/// Parses config text, reporting JSON syntax errors with line and column.
inline nlohmann::json parse_config_text(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
}

/// Fully resolved config; parse_sweep_spec(resolved_config(s)) reproduces s.
inline nlohmann::ordered_json resolved_config(const SweepSpec& spec, std::string_view command) {
  nlohmann::ordered_json j;
  j["command"] = std::string(command);
  auto& link = j["link"];
  link["coil_radius_m"] = spec.link.coil.radius_a;
  link["coil_turns"] = spec.link.coil.turns_n;
  link["f0_hz"] = spec.link.f0;
  link["z_ref_ohm"] = spec.link.z_ref;
  link["p_tx_w"] = spec.link.p_tx;
  if (spec.axis != Axis::pilots) link["pilots"] = spec.link.pilots_l;
  link["bandwidth_hz"] = spec.link.bandwidth_b;
  link["temp_k"] = spec.link.temp_t0;

  auto theta = nlohmann::ordered_json::object();
  if (spec.axis != Axis::range) theta["r_m"] = spec.theta.r;
  j["theta"] = theta;

  j["sweep"]["axis"] = std::string(to_string(spec.axis));
  j["sweep"]["values"] = spec.values;

  if (spec.axis != Axis::conductivity) {
    auto media = nlohmann::ordered_json::array();
    for (const auto& m : spec.media) {
      if (m.name == "custom") media.push_back(m.sigma_m);
      else media.push_back(m.name);
    }
    j["media"] = media;
  }

  auto& mle = j["mle"];
  mle["r_bounds_m"] = {spec.mle.r_bounds.lo, spec.mle.r_bounds.hi};
  mle["sigma_bounds_s_per_m"] = {spec.mle.sigma_bounds.lo, spec.mle.sigma_bounds.hi};
  mle["starts_per_axis"] = spec.mle.starts_per_axis;
  mle["simplex_tol"] = spec.mle.simplex_tol;
  mle["max_iters"] = spec.mle.max_iters;

  if (spec.mc) {
    j["mc"]["trials"] = spec.mc->trials;
    j["mc"]["seed"] = spec.mc->seed;
  }
  j["convergence_threshold"] = spec.convergence_threshold;
  return j;
}

}  // namespace miisac
