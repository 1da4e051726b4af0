#pragma once

// Fisher information and Cramer-Rao bounds for joint (range, conductivity)
// estimation from the matched-filter statistic h_mf ~ CN(h(theta), N0 B / (L P_tx)).

#include <cmath>
#include <complex>

#include "miisac/errors.hpp"
#include "miisac/physics.hpp"

namespace miisac {

/// Symmetric 2x2 FIM over (r, sigma_m).
struct Fim2 {
  double j11 = 0.0;    // 1/m^2
  double j12 = 0.0;    // 1/(m * S/m)
  double j22 = 0.0;    // 1/(S/m)^2
  double gamma = 0.0;  // 2 L P_tx |h|^2 / (N0 B)

  double det() const { return j11 * j22 - j12 * j12; }
  double rho() const { return j12 / std::sqrt(j11 * j22); }
};

struct CrbReport {
  double crb_r_joint = 0.0;       // m^2
  double crb_r_single = 0.0;      // m^2
  double crb_sigma_joint = 0.0;   // (S/m)^2
  double crb_sigma_single = 0.0;  // (S/m)^2
  double rho = 0.0;
  double penalty_r_db = 0.0;
  double penalty_sigma_db = 0.0;
};

struct Penalty {
  double linear = 1.0;
  double db = 0.0;
};

inline constexpr double kSingularFimEps = 1.0e-14;

/// Closed-form FIM entries.
inline Fim2 fim(const Theta& theta, const LinkConfig& cfg) {
  validate(theta);
  const double a = alpha(theta.sigma_m, cfg.f0);
  const double r = theta.r;
  const double s = theta.sigma_m;
  const double beta = 3.0 / r + a;
  const double gamma = 2.0 * std::norm(channel_gain(theta, cfg)) / noise_variance_mf(cfg);
  Fim2 j;
  j.gamma = gamma;
  j.j11 = gamma * (beta * beta + a * a);
  j.j22 = gamma * a * a * r * r / (2.0 * s * s);
  j.j12 = gamma * a * r * (beta + a) / (2.0 * s);
  return j;
}

/// FIM assembled from the analytic gradient, J_ij = (2 / var) Re[dh_i conj(dh_j)].
/// Independent of the closed form in fim(); used to cross-check it.
inline Fim2 fim_from_gradient(const Theta& theta, const LinkConfig& cfg) {
  const ChannelGradient g = channel_gradient(theta, cfg);
  const double scale = 2.0 / noise_variance_mf(cfg);
  Fim2 j;
  j.gamma = scale * std::norm(channel_gain(theta, cfg));
  j.j11 = scale * std::norm(g.dh_dr);
  j.j22 = scale * std::norm(g.dh_dsigma);
  j.j12 = scale * std::real(g.dh_dr * std::conj(g.dh_dsigma));
  return j;
}

/// FIM correlation as a function of alpha*r alone.
inline double rho_closed_form(double alpha_r) {
  if (!(alpha_r >= 0.0)) throw DomainError("rho_closed_form requires alpha_r >= 0");
  if (std::isinf(alpha_r)) return 1.0;
  const double num = 3.0 + 2.0 * alpha_r;
  const double den = std::sqrt(2.0 * ((3.0 + alpha_r) * (3.0 + alpha_r) + alpha_r * alpha_r));
  return num / den;
}

/// Joint-estimation penalty 1/(1 - rho^2), identical for both parameters.
inline Penalty penalty(double rho) {
  if (!(std::abs(rho) < 1.0)) throw SingularFimError("penalty diverges for |rho| >= 1");
  const double lin = 1.0 / (1.0 - rho * rho);
  return {lin, 10.0 * std::log10(lin)};
}

inline CrbReport crb_report(const Fim2& j) {
  const double det = j.det();
  if (!(det > kSingularFimEps * j.j11 * j.j22))
    throw SingularFimError("Fisher information matrix is numerically singular");
  CrbReport rep;
  rep.crb_r_joint = j.j22 / det;
  rep.crb_r_single = 1.0 / j.j11;
  rep.crb_sigma_joint = j.j11 / det;
  rep.crb_sigma_single = 1.0 / j.j22;
  rep.rho = j.rho();
  rep.penalty_r_db = 10.0 * std::log10(rep.crb_r_joint / rep.crb_r_single);
  rep.penalty_sigma_db = 10.0 * std::log10(rep.crb_sigma_joint / rep.crb_sigma_single);
  return rep;
}

inline CrbReport crb_report(const Theta& theta, const LinkConfig& cfg) {
  return crb_report(fim(theta, cfg));
}

}  // namespace miisac
