#pragma once

// Seeded Monte Carlo harness: noisy matched-filter observations, joint and
// conditional MLE per trial, and aggregate statistics against the CRB.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "miisac/errors.hpp"
#include "miisac/estimation.hpp"
#include "miisac/fisher.hpp"
#include "miisac/physics.hpp"
#include "miisac/rng.hpp"

namespace miisac {

struct TrialSpec {
  Theta theta_true;
  LinkConfig cfg;
  MleConfig mle_cfg;
  int n_trials = 1000;
  std::uint64_t seed = 1;
};

struct TrialStats {
  int n_trials = 0;
  int n_converged = 0;
  int n_boundary = 0;  // excluded because an estimate sat on a search bound
  double convergence_rate = 0.0;

  std::optional<double> mean_r;
  std::optional<double> var_r;
  std::optional<double> mean_sigma;
  std::optional<double> var_sigma;
  std::optional<double> rmse_r;
  std::optional<double> rmse_sigma;
  std::optional<double> var_r_conditional;
  std::optional<double> empirical_penalty_db;

  double crb_r_joint = 0.0;
  double crb_r_single = 0.0;
  double crb_sigma_joint = 0.0;
  double snr_db = 0.0;

  std::optional<double> bias_r() const {
    if (!mean_r) return std::nullopt;
    return *mean_r - truth_r;
  }
  std::optional<double> bias_sigma() const {
    if (!mean_sigma) return std::nullopt;
    return *mean_sigma - truth_sigma;
  }

  double truth_r = 0.0;
  double truth_sigma = 0.0;
};

/// h(theta) plus CN(0, variance) noise. variance = 0 returns h exactly.
inline ComplexGain add_noise(ComplexGain h, double variance, CounterRng& rng) {
  if (variance == 0.0) return h;
  return h + rng.complex_normal(variance);
}

/// One matched-filter statistic drawn directly from its sampling law.
inline ComplexGain draw_observation(const Theta& theta, const LinkConfig& cfg, CounterRng& rng) {
  return add_noise(channel_gain(theta, cfg), noise_variance_mf(cfg), rng);
}

/// Full pilot block y_l = h x_l + n_l with constant pilots x_l = sqrt(P_tx).
inline PilotBlock simulate_pilot_block(const Theta& theta, const LinkConfig& cfg,
                                       CounterRng& rng) {
  const ComplexGain h = channel_gain(theta, cfg);
  const double per_symbol_var = cfg.noise_psd() * cfg.bandwidth_b;
  const ComplexGain x{std::sqrt(cfg.p_tx), 0.0};
  PilotBlock block;
  block.symbols.assign(static_cast<std::size_t>(cfg.pilots_l), x);
  block.received.reserve(block.symbols.size());
  for (const auto& s : block.symbols) block.received.push_back(h * s + rng.complex_normal(per_symbol_var));
  return block;
}

struct TrialOutcome {
  MleEstimate joint;
  MleEstimate conditional;

  bool usable() const {
    return joint.converged && conditional.converged && !joint.on_boundary &&
           !conditional.on_boundary;
  }
};

/// Single trial; depends only on (spec, index).
inline TrialOutcome run_trial(const TrialSpec& spec, std::uint64_t index) {
  CounterRng rng(spec.seed, index);
  const ComplexGain h_mf = draw_observation(spec.theta_true, spec.cfg, rng);
  return {mle_joint(h_mf, spec.cfg, spec.mle_cfg),
          mle_conditional(h_mf, spec.theta_true.sigma_m, spec.cfg, spec.mle_cfg)};
}

namespace detail {

struct Moments {
  std::optional<double> mean;
  std::optional<double> var;  // unbiased, n - 1
};

// Two-pass in fixed index order.
inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  m.mean = mean;
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  m.var = ss / static_cast<double>(xs.size() - 1);
  return m;
}

}  // namespace detail

inline TrialStats aggregate(const TrialSpec& spec, const std::vector<TrialOutcome>& outcomes) {
  TrialStats st;
  st.n_trials = static_cast<int>(outcomes.size());
  st.truth_r = spec.theta_true.r;
  st.truth_sigma = spec.theta_true.sigma_m;

  std::vector<double> r_joint, s_joint, r_cond;
  for (const auto& o : outcomes) {
    if (!o.usable()) {
      if (o.joint.on_boundary || o.conditional.on_boundary) ++st.n_boundary;
      continue;
    }
    r_joint.push_back(o.joint.theta_hat.r);
    s_joint.push_back(o.joint.theta_hat.sigma_m);
    r_cond.push_back(o.conditional.theta_hat.r);
  }
  st.n_converged = static_cast<int>(r_joint.size());
  st.convergence_rate =
      st.n_trials > 0 ? static_cast<double>(st.n_converged) / static_cast<double>(st.n_trials) : 0.0;

  const auto mr = detail::moments(r_joint);
  const auto ms = detail::moments(s_joint);
  const auto mc = detail::moments(r_cond);
  st.mean_r = mr.mean;
  st.var_r = mr.var;
  st.mean_sigma = ms.mean;
  st.var_sigma = ms.var;
  st.var_r_conditional = mc.var;
  if (mr.var) {
    const double b = *mr.mean - st.truth_r;
    st.rmse_r = std::sqrt(*mr.var + b * b);
  }
  if (ms.var) {
    const double b = *ms.mean - st.truth_sigma;
    st.rmse_sigma = std::sqrt(*ms.var + b * b);
  }
  if (mr.var && mc.var && *mc.var > 0.0 && *mr.var > 0.0)
    st.empirical_penalty_db = 10.0 * std::log10(*mr.var / *mc.var);

  const Fim2 j = fim(spec.theta_true, spec.cfg);
  try {
    const CrbReport rep = crb_report(j);
    st.crb_r_joint = rep.crb_r_joint;
    st.crb_r_single = rep.crb_r_single;
    st.crb_sigma_joint = rep.crb_sigma_joint;
  } catch (const SingularFimError&) {
    st.crb_r_joint = st.crb_sigma_joint = HUGE_VAL;
    st.crb_r_single = 1.0 / j.j11;
  }
  st.snr_db = 10.0 * std::log10(snr_mf(spec.theta_true, spec.cfg));
  return st;
}

struct BatchOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

inline std::vector<TrialOutcome> run_trials(const TrialSpec& spec, const BatchOptions& opt = {}) {
  validate(spec.theta_true);
  validate(spec.cfg);
  validate(spec.mle_cfg);
  if (spec.n_trials < 1) throw ConfigError("n_trials must be >= 1");

  const auto n = static_cast<std::size_t>(spec.n_trials);
  std::vector<TrialOutcome> out(n);
  unsigned threads = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = run_trial(spec, i);
  };
  if (threads <= 1) {
    work(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b >= e) break;
      pool.emplace_back(work, b, e);
    }
  }
  return out;
}

inline TrialStats run_batch(const TrialSpec& spec, const BatchOptions& opt = {}) {
  return aggregate(spec, run_trials(spec, opt));
}

}  // namespace miisac
