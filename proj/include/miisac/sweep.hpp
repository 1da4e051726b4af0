#pragma once

// Parameter sweeps behind the `crb`, `penalty`, `mle` and `figures` commands.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "miisac/config.hpp"
#include "miisac/fisher.hpp"
#include "miisac/montecarlo.hpp"
#include "miisac/physics.hpp"
#include "miisac/rng.hpp"
#include "miisac/table.hpp"

namespace miisac {

struct SweepPoint {
  std::string medium;
  Theta theta;
  LinkConfig link;
};

/// Rows in sweep order: values outer, media inner.
inline std::vector<SweepPoint> expand(const SweepSpec& spec) {
  std::vector<SweepPoint> pts;
  pts.reserve(spec.values.size() * spec.media.size());
  for (double v : spec.values) {
    for (const auto& m : spec.media) {
      SweepPoint p{m.name, spec.theta, spec.link};
      switch (spec.axis) {
        case Axis::range:
          p.theta.r = v;
          p.theta.sigma_m = m.sigma_m;
          break;
        case Axis::conductivity:
          p.theta.sigma_m = v;
          break;
        case Axis::pilots:
          p.link.pilots_l = static_cast<int>(v);
          p.theta.sigma_m = m.sigma_m;
          break;
      }
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline SweepResult start_result(const SweepSpec& spec, std::string_view command) {
  SweepResult res;
  const auto cfg = resolved_config(spec, command);
  const std::string hash = hex64(fnv1a64(cfg.dump()));
  res.metadata["schema_version"] = kSchemaVersion;
  res.metadata["tool_version"] = kToolVersion;
  res.metadata["command"] = std::string(command);
  res.metadata["axis"] = std::string(to_string(spec.axis));
  if (spec.mc) res.metadata["seed"] = spec.mc->seed;
  res.metadata["timestamp"] = utc_timestamp();
  res.metadata["config_hash"] = hash;
  res.metadata["config"] = cfg.dump();
  return res;
}

inline const std::string& config_hash(const SweepResult& res) {
  return res.metadata.at("config_hash").get_ref<const std::string&>();
}

inline void add_point_columns(std::vector<std::string>& cols) {
  cols.insert(cols.end(), {"r[m]", "sigma[S/m]", "pilots", "medium"});
}

inline void push_point(std::vector<Cell>& row, const SweepPoint& p) {
  row.emplace_back(p.theta.r);
  row.emplace_back(p.theta.sigma_m);
  row.emplace_back(static_cast<std::int64_t>(p.link.pilots_l));
  row.emplace_back(p.medium);
}

inline Cell opt_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

inline void add_mc_columns(std::vector<std::string>& cols) {
  cols.insert(cols.end(),
              {"mc_seed", "mc_trials", "mc_converged", "mc_boundary", "mc_convergence_rate",
               "mc_mean_r[m]", "mc_var_r[m^2]", "mc_bias_r[m]", "mc_rmse_r[m]",
               "mc_mean_sigma[S/m]", "mc_var_sigma[(S/m)^2]", "mc_bias_sigma[S/m]",
               "mc_rmse_sigma[S/m]", "mc_var_r_conditional[m^2]", "mc_empirical_penalty[dB]",
               "mc_var_r_over_crb", "mc_var_sigma_over_crb"});
}

inline void push_mc(std::vector<Cell>& row, std::uint64_t seed, const TrialStats& st) {
  row.emplace_back(static_cast<std::int64_t>(seed & 0x7fffffffffffffffULL));
  row.emplace_back(static_cast<std::int64_t>(st.n_trials));
  row.emplace_back(static_cast<std::int64_t>(st.n_converged));
  row.emplace_back(static_cast<std::int64_t>(st.n_boundary));
  row.emplace_back(st.convergence_rate);
  row.push_back(opt_cell(st.mean_r));
  row.push_back(opt_cell(st.var_r));
  row.push_back(opt_cell(st.bias_r()));
  row.push_back(opt_cell(st.rmse_r));
  row.push_back(opt_cell(st.mean_sigma));
  row.push_back(opt_cell(st.var_sigma));
  row.push_back(opt_cell(st.bias_sigma()));
  row.push_back(opt_cell(st.rmse_sigma));
  row.push_back(opt_cell(st.var_r_conditional));
  row.push_back(opt_cell(st.empirical_penalty_db));
  std::optional<double> vr, vs;
  if (st.var_r && std::isfinite(st.crb_r_joint)) vr = *st.var_r / st.crb_r_joint;
  if (st.var_sigma && std::isfinite(st.crb_sigma_joint)) vs = *st.var_sigma / st.crb_sigma_joint;
  row.push_back(opt_cell(vr));
  row.push_back(opt_cell(vs));
}

// Per-row Monte Carlo seed; rows stay independent of each other's trial counts.
inline std::uint64_t row_seed(std::uint64_t base, std::size_t row) {
  return mix64(base ^ mix64(static_cast<std::uint64_t>(row) + 0x632be59bd9b4e019ULL));
}

inline void add_crb_columns(std::vector<std::string>& cols) {
  cols.insert(cols.end(),
              {"kappa_r", "snr[dB]", "crb_r_joint[m^2]", "crb_r_single[m^2]",
               "crb_sigma_joint[(S/m)^2]", "crb_sigma_single[(S/m)^2]", "sqrt_crb_r_joint[m]",
               "sqrt_crb_r_single[m]", "sqrt_crb_sigma_joint[S/m]", "sqrt_crb_sigma_single[S/m]",
               "rho", "penalty", "penalty[dB]", "singular"});
}

// Returns false when the FIM is singular at this point.
inline bool push_crb(std::vector<Cell>& row, const SweepPoint& p) {
  row.emplace_back(kappa_r(p.theta, p.link.f0));
  row.emplace_back(10.0 * std::log10(snr_mf(p.theta, p.link)));
  try {
    const CrbReport rep = crb_report(p.theta, p.link);
    const Penalty pen = penalty(rep.rho);
    row.emplace_back(rep.crb_r_joint);
    row.emplace_back(rep.crb_r_single);
    row.emplace_back(rep.crb_sigma_joint);
    row.emplace_back(rep.crb_sigma_single);
    row.emplace_back(std::sqrt(rep.crb_r_joint));
    row.emplace_back(std::sqrt(rep.crb_r_single));
    row.emplace_back(std::sqrt(rep.crb_sigma_joint));
    row.emplace_back(std::sqrt(rep.crb_sigma_single));
    row.emplace_back(rep.rho);
    row.emplace_back(pen.linear);
    row.emplace_back(pen.db);
    row.emplace_back(std::int64_t{0});
    return true;
  } catch (const SingularFimError&) {
    for (int i = 0; i < 11; ++i) row.emplace_back(std::monostate{});
    row.emplace_back(std::int64_t{1});
    return false;
  }
}

}  // namespace detail

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

struct RunOptions {
  BatchOptions batch;
  ProgressFn progress;
};

inline SweepResult cmd_crb(const SweepSpec& spec) {
  SweepResult res = detail::start_result(spec, "crb");
  detail::add_point_columns(res.columns);
  detail::add_crb_columns(res.columns);
  const bool thresholds = spec.axis == Axis::pilots;
  if (thresholds) res.columns.insert(res.columns.end(), {"threshold_cm[m]", "threshold_mm[m]"});
  res.columns.push_back("config_hash");

  for (const auto& p : expand(spec)) {
    std::vector<Cell> row;
    detail::push_point(row, p);
    if (!detail::push_crb(row, p)) ++res.singular_rows;
    if (thresholds) {
      row.emplace_back(0.01);
      row.emplace_back(0.001);
    }
    row.emplace_back(detail::config_hash(res));
    res.rows.push_back(std::move(row));
  }
  return res;
}

inline SweepResult cmd_penalty(const SweepSpec& spec, const RunOptions& opt = {}) {
  SweepResult res = detail::start_result(spec, "penalty");
  detail::add_point_columns(res.columns);
  res.columns.insert(res.columns.end(), {"alpha_r", "kappa_r", "rho", "penalty", "penalty[dB]"});
  if (spec.mc) detail::add_mc_columns(res.columns);
  res.columns.push_back("config_hash");

  const auto points = expand(spec);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    std::vector<Cell> row;
    detail::push_point(row, p);
    const double ar = alpha(p.theta.sigma_m, p.link.f0) * p.theta.r;
    const double rho = rho_closed_form(ar);
    row.emplace_back(ar);
    row.emplace_back(std::numbers::sqrt2 * ar);
    row.emplace_back(rho);
    if (std::abs(rho) < 1.0) {
      const Penalty pen = penalty(rho);
      row.emplace_back(pen.linear);
      row.emplace_back(pen.db);
    } else {
      ++res.singular_rows;
      row.emplace_back(std::monostate{});
      row.emplace_back(std::monostate{});
    }
    if (spec.mc) {
      const TrialSpec ts{p.theta, p.link, spec.mle, spec.mc->trials,
                         detail::row_seed(spec.mc->seed, i)};
      const TrialStats st = run_batch(ts, opt.batch);
      if (st.convergence_rate < spec.convergence_threshold) ++res.convergence_breaches;
      detail::push_mc(row, ts.seed, st);
      if (opt.progress) opt.progress(i + 1, points.size());
    }
    row.emplace_back(detail::config_hash(res));
    res.rows.push_back(std::move(row));
  }
  return res;
}

inline SweepResult cmd_mle(const SweepSpec& spec, const RunOptions& opt = {}) {
  if (!spec.mc) throw ConfigError("mle sweep needs Monte Carlo settings ('mc')");
  SweepResult res = detail::start_result(spec, "mle");
  detail::add_point_columns(res.columns);
  detail::add_crb_columns(res.columns);
  detail::add_mc_columns(res.columns);
  res.columns.push_back("config_hash");

  const auto points = expand(spec);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    std::vector<Cell> row;
    detail::push_point(row, p);
    if (!detail::push_crb(row, p)) ++res.singular_rows;
    const TrialSpec ts{p.theta, p.link, spec.mle, spec.mc->trials,
                       detail::row_seed(spec.mc->seed, i)};
    const TrialStats st = run_batch(ts, opt.batch);
    if (st.convergence_rate < spec.convergence_threshold) ++res.convergence_breaches;
    detail::push_mc(row, ts.seed, st);
    row.emplace_back(detail::config_hash(res));
    res.rows.push_back(std::move(row));
    if (opt.progress) opt.progress(i + 1, points.size());
  }
  return res;
}

enum class Figure { fig2, fig3, fig4 };
enum class Scale { desk, full };

inline int scale_trials(Scale s) { return s == Scale::full ? 5000 : 1000; }

struct FigureOutput {
  std::string filename;
  SweepResult result;
};

/// Canonical sweeps for one figure. Analytic files are identical across scales;
/// Monte Carlo files differ in trial count and marker density.
inline std::vector<FigureOutput> cmd_figures(Figure which, Scale scale, std::uint64_t seed,
                                             const RunOptions& opt = {}) {
  const bool full = scale == Scale::full;
  const Medium typical = *find_medium("typical_soil");
  const McSettings mc{scale_trials(scale), seed};
  std::vector<FigureOutput> out;

  auto base = [] {
    SweepSpec s;
    s.media = medium_presets();
    return s;
  };

  switch (which) {
    case Figure::fig2: {
      SweepSpec crb = base();
      crb.axis = Axis::range;
      crb.values = log_space(1.0, 30.0, 60);
      out.push_back({"fig2_crb.csv", cmd_crb(crb)});

      SweepSpec mle = base();
      mle.axis = Axis::range;
      mle.values = full ? std::vector<double>{1, 2, 3, 5, 7, 10, 15, 20}
                        : std::vector<double>{2, 5, 10, 20};
      mle.media = {typical};
      mle.mc = mc;
      out.push_back({"fig2_mle.csv", cmd_mle(mle, opt)});
      break;
    }
    case Figure::fig3: {
      SweepSpec pen = base();
      pen.axis = Axis::range;
      pen.values = log_space(0.5, 30.0, 80);
      out.push_back({"fig3_penalty.csv", cmd_penalty(pen, opt)});

      SweepSpec mle = base();
      mle.axis = Axis::range;
      mle.values = full ? std::vector<double>{1, 2, 3, 5, 7, 10, 15, 20}
                        : std::vector<double>{1, 2, 5, 10, 20};
      mle.media = {typical};
      mle.mc = mc;
      out.push_back({"fig3_mle.csv", cmd_penalty(mle, opt)});
      break;
    }
    case Figure::fig4: {
      for (double r : {5.0, 10.0, 20.0}) {
        const std::string tag = "r" + std::to_string(static_cast<int>(r)) + "m";
        SweepSpec crb = base();
        crb.axis = Axis::pilots;
        crb.theta.r = r;
        crb.media = {typical};
        crb.values = log_space(10.0, 10000.0, 61);
        for (auto& v : crb.values) v = std::round(v);
        out.push_back({"fig4_crb_" + tag + ".csv", cmd_crb(crb)});

        if (r == 5.0) continue;
        SweepSpec mle = crb;
        mle.values = full ? std::vector<double>{10, 20, 50, 100, 200, 500, 1000}
                          : std::vector<double>{20, 50, 100, 200, 500};
        mle.mc = mc;
        out.push_back({"fig4_mle_" + tag + ".csv", cmd_mle(mle, opt)});
      }
      break;
    }
  }
  return out;
}

/// Smallest swept pilot count whose sqrt(CRB_r^joint) is at or below `target_m`.
inline std::optional<int> pilots_for_accuracy(const SweepResult& res, double target_m) {
  const auto lcol = res.column("pilots");
  const auto ccol = res.column("sqrt_crb_r_joint[m]");
  for (const auto& row : res.rows) {
    if (!std::holds_alternative<double>(row[ccol])) continue;
    if (std::get<double>(row[ccol]) <= target_m)
      return static_cast<int>(std::get<std::int64_t>(row[lcol]));
  }
  return std::nullopt;
}

}  // namespace miisac
