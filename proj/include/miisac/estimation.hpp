#pragma once

// Matched-filter channel statistic and maximum-likelihood estimation of
// (r, sigma_m) by multi-start Nelder-Mead in log-parameter space.

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "miisac/errors.hpp"
#include "miisac/nelder_mead.hpp"
#include "miisac/physics.hpp"

namespace miisac {

struct PilotBlock {
  std::vector<ComplexGain> symbols;
  std::vector<ComplexGain> received;
};

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct MleConfig {
  Bounds r_bounds{0.5, 100.0};
  Bounds sigma_bounds{1.0e-4, 1.0};
  int starts_per_axis = 4;
  double simplex_tol = 1.0e-10;  // log-space simplex diameter
  int max_iters = 2000;          // per start
};

struct MleEstimate {
  Theta theta_hat;
  double nll_value = 0.0;
  bool converged = false;
  bool on_boundary = false;
  int starts_used = 0;
  int iterations_total = 0;
};

inline void validate(const MleConfig& m) {
  auto check = [](const Bounds& b, const char* name) {
    if (!(b.lo > 0.0) || !(b.hi > b.lo) || !std::isfinite(b.hi))
      throw ConfigError(std::string(name) + " bounds must satisfy 0 < lo < hi");
  };
  check(m.r_bounds, "r");
  check(m.sigma_bounds, "sigma");
  if (m.starts_per_axis < 1) throw ConfigError("starts_per_axis must be >= 1");
  if (!(m.simplex_tol > 0.0)) throw ConfigError("simplex_tol must be > 0");
  if (m.max_iters < 1) throw ConfigError("max_iters must be >= 1");
}

/// Pilot-weighted least-squares channel estimate sum(y x*) / sum(|x|^2).
inline ComplexGain matched_filter(std::span<const ComplexGain> symbols,
                                  std::span<const ComplexGain> received) {
  if (symbols.size() != received.size() || symbols.empty())
    throw DegeneratePilotError("pilot block needs equal, non-zero symbol and observation counts");
  ComplexGain num{0.0, 0.0};
  double energy = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    num += received[i] * std::conj(symbols[i]);
    energy += std::norm(symbols[i]);
  }
  if (!(energy > 0.0)) throw DegeneratePilotError("pilot energy is zero");
  return num / energy;
}

inline ComplexGain matched_filter(const PilotBlock& block) {
  return matched_filter(block.symbols, block.received);
}

/// Negative log-likelihood of h_mf given theta, up to an additive constant:
/// L P_tx |h_mf - h(theta)|^2 / (N0 B).
inline double nll(const Theta& theta, ComplexGain h_mf, const LinkConfig& cfg) {
  return std::norm(h_mf - channel_gain(theta, cfg)) / noise_variance_mf(cfg);
}

namespace detail {

struct LogBox {
  double lo;
  double hi;

  double clamp(double x) const { return std::min(std::max(x, lo), hi); }
  double excess(double x) const { return x < lo ? lo - x : (x > hi ? x - hi : 0.0); }
  bool touches(double x) const {
    constexpr double edge = 1.0e-6;
    return x - lo < edge || hi - x < edge;
  }
};

inline LogBox log_box(const Bounds& b) { return {std::log(b.lo), std::log(b.hi)}; }

// Infeasible points are evaluated at their projection plus a quadratic
// penalty, so the simplex is pushed back inside the box.
inline double with_box_penalty(double inside_value, double excess_sq) {
  return inside_value + (1.0 + inside_value) * 1.0e3 * excess_sq;
}

// Start i of n on a log-uniform grid, cell centres.
inline double grid_point(const LogBox& box, int i, int n) {
  return box.lo + (box.hi - box.lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
}

inline constexpr double kTieTolerance = 1.0e-12;

}  // namespace detail

inline MleEstimate mle_joint(ComplexGain h_mf, const LinkConfig& cfg, const MleConfig& mcfg) {
  validate(mcfg);
  const auto rbox = detail::log_box(mcfg.r_bounds);
  const auto sbox = detail::log_box(mcfg.sigma_bounds);
  const double inv_var = 1.0 / noise_variance_mf(cfg);

  auto objective = [&](const std::array<double, 2>& x) {
    const double lr = rbox.clamp(x[0]);
    const double ls = sbox.clamp(x[1]);
    const double er = rbox.excess(x[0]);
    const double es = sbox.excess(x[1]);
    const Theta t{std::exp(lr), std::exp(ls)};
    const double v = std::norm(h_mf - channel_gain(t, cfg)) * inv_var;
    return detail::with_box_penalty(v, er * er + es * es);
  };

  const int n = mcfg.starts_per_axis;
  const std::array<double, 2> step{0.5 * (rbox.hi - rbox.lo) / n, 0.5 * (sbox.hi - sbox.lo) / n};
  NelderMeadOptions opt;
  opt.tol = mcfg.simplex_tol;
  opt.max_iters = mcfg.max_iters;

  MleEstimate best;
  bool have_best = false;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const std::array<double, 2> start{detail::grid_point(rbox, i, n),
                                        detail::grid_point(sbox, k, n)};
      const auto res = nelder_mead<2>(objective, start, step, opt);
      best.iterations_total += res.iterations;
      ++best.starts_used;
      if (!have_best || res.value < best.nll_value - detail::kTieTolerance) {
        have_best = true;
        const double lr = rbox.clamp(res.x[0]);
        const double ls = sbox.clamp(res.x[1]);
        best.theta_hat = {std::exp(lr), std::exp(ls)};
        best.nll_value = res.value;
        best.converged = res.converged;
        best.on_boundary = rbox.touches(lr) || sbox.touches(ls);
      }
    }
  }
  return best;
}

/// Range-only MLE with conductivity pinned at `sigma_known`.
inline MleEstimate mle_conditional(ComplexGain h_mf, double sigma_known, const LinkConfig& cfg,
                                   const MleConfig& mcfg) {
  validate(mcfg);
  if (!(sigma_known > 0.0)) throw DomainError("pinned conductivity must be > 0");
  const auto rbox = detail::log_box(mcfg.r_bounds);
  const double inv_var = 1.0 / noise_variance_mf(cfg);

  auto objective = [&](const std::array<double, 1>& x) {
    const double lr = rbox.clamp(x[0]);
    const double er = rbox.excess(x[0]);
    const Theta t{std::exp(lr), sigma_known};
    const double v = std::norm(h_mf - channel_gain(t, cfg)) * inv_var;
    return detail::with_box_penalty(v, er * er);
  };

  const int n = mcfg.starts_per_axis;
  const std::array<double, 1> step{0.5 * (rbox.hi - rbox.lo) / n};
  NelderMeadOptions opt;
  opt.tol = mcfg.simplex_tol;
  opt.max_iters = mcfg.max_iters;

  MleEstimate best;
  bool have_best = false;
  for (int i = 0; i < n; ++i) {
    const auto res = nelder_mead<1>(objective, {detail::grid_point(rbox, i, n)}, step, opt);
    best.iterations_total += res.iterations;
    ++best.starts_used;
    if (!have_best || res.value < best.nll_value - detail::kTieTolerance) {
      have_best = true;
      const double lr = rbox.clamp(res.x[0]);
      best.theta_hat = {std::exp(lr), sigma_known};
      best.nll_value = res.value;
      best.converged = res.converged;
      best.on_boundary = rbox.touches(lr);
    }
  }
  return best;
}

}  // namespace miisac
