#pragma once

// Magneto-inductive channel between two coaxial coils in a conductive medium.
//
// All quantities are SI. The complex gain is
//
//     h(r, sigma) = C / r^3 * exp(-(1 + j) * alpha * r),
//     alpha       = sqrt(pi * f0 * mu0 * sigma),
//     C           = omega * mu0 * pi * N^2 * a^4 / (2 * Z_ref).

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "miisac/errors.hpp"

namespace miisac {

using ComplexGain = std::complex<double>;

namespace constants {
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;  // H/m
inline constexpr double k_boltzmann = 1.380649e-23;        // J/K
}  // namespace constants

struct CoilSpec {
  double radius_a = 0.15;  // m
  int turns_n = 20;
};

struct LinkConfig {
  CoilSpec coil;
  double f0 = 10.0e3;          // Hz
  double z_ref = 50.0;         // Ohm
  double p_tx = 1.0e-3;        // W (0 dBm)
  int pilots_l = 100;
  double bandwidth_b = 1.0e3;  // Hz
  double temp_t0 = 290.0;      // K

  double noise_psd() const { return constants::k_boltzmann * temp_t0; }
};

struct Theta {
  double r = 10.0;         // m
  double sigma_m = 0.01;   // S/m
};

inline double dbm_to_watts(double dbm) { return 1.0e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1.0e-3); }

inline void validate(const CoilSpec& coil) {
  if (!(coil.radius_a > 0.0) || !std::isfinite(coil.radius_a))
    throw DomainError("coil radius must be > 0");
  if (coil.turns_n < 1) throw DomainError("coil turns must be >= 1");
}

inline void validate(const LinkConfig& cfg) {
  validate(cfg.coil);
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be > 0");
  };
  positive(cfg.f0, "f0");
  positive(cfg.z_ref, "z_ref");
  positive(cfg.p_tx, "p_tx");
  positive(cfg.bandwidth_b, "bandwidth");
  positive(cfg.temp_t0, "temperature");
  if (cfg.pilots_l < 1) throw DomainError("pilot count must be >= 1");
}

inline void validate(const Theta& theta) {
  if (!(theta.r > 0.0) || !std::isfinite(theta.r)) throw DomainError("range r must be > 0");
  if (!(theta.sigma_m > 0.0) || !std::isfinite(theta.sigma_m))
    throw DomainError("conductivity sigma_m must be > 0");
}

/// Field attenuation constant in 1/m. Skin depth is its reciprocal.
inline double alpha(double sigma_m, double f0) {
  if (!(sigma_m > 0.0) || !(f0 > 0.0)) throw DomainError("alpha requires sigma_m > 0 and f0 > 0");
  return std::sqrt(std::numbers::pi * f0 * constants::mu0 * sigma_m);
}

inline double skin_depth(double sigma_m, double f0) { return 1.0 / alpha(sigma_m, f0); }

/// Electrical distance sqrt(2) * alpha * r, i.e. separation over skin depth.
inline double kappa_r(const Theta& theta, double f0) {
  validate(theta);
  return std::numbers::sqrt2 * alpha(theta.sigma_m, f0) * theta.r;
}

/// C in m^3; absorbs every frequency- and geometry-dependent factor of the gain.
inline double channel_constant(const LinkConfig& cfg) {
  const double omega = 2.0 * std::numbers::pi * cfg.f0;
  const double n = static_cast<double>(cfg.coil.turns_n);
  const double a2 = cfg.coil.radius_a * cfg.coil.radius_a;
  return omega * constants::mu0 * std::numbers::pi * n * n * a2 * a2 / (2.0 * cfg.z_ref);
}

/// Mutual inductance between the coils (H).
inline ComplexGain mutual_inductance(const Theta& theta, const LinkConfig& cfg) {
  validate(theta);
  const double n = static_cast<double>(cfg.coil.turns_n);
  const double a2 = cfg.coil.radius_a * cfg.coil.radius_a;
  const double ar = alpha(theta.sigma_m, cfg.f0) * theta.r;
  const double mag = constants::mu0 * std::numbers::pi * n * n * a2 * a2 /
                     (2.0 * theta.r * theta.r * theta.r) * std::exp(-ar);
  return std::polar(mag, -ar);
}

inline ComplexGain channel_gain(const Theta& theta, const LinkConfig& cfg) {
  validate(theta);
  const double ar = alpha(theta.sigma_m, cfg.f0) * theta.r;
  const double mag = channel_constant(cfg) / (theta.r * theta.r * theta.r) * std::exp(-ar);
  return std::polar(mag, -ar);
}

struct ChannelGradient {
  ComplexGain dh_dr;      // per m
  ComplexGain dh_dsigma;  // per S/m
};

inline ChannelGradient channel_gradient(const Theta& theta, const LinkConfig& cfg) {
  const ComplexGain h = channel_gain(theta, cfg);
  const double a = alpha(theta.sigma_m, cfg.f0);
  const double beta = 3.0 / theta.r + a;
  const double s = a * theta.r / (2.0 * theta.sigma_m);
  return {h * ComplexGain(-beta, -a), h * ComplexGain(-s, -s)};
}

/// Variance of the matched-filter statistic's complex noise, N0 B / (L P_tx).
inline double noise_variance_mf(const LinkConfig& cfg) {
  return cfg.noise_psd() * cfg.bandwidth_b / (static_cast<double>(cfg.pilots_l) * cfg.p_tx);
}

/// Post-matched-filter SNR |h|^2 / var(n~).
inline double snr_mf(const Theta& theta, const LinkConfig& cfg) {
  return std::norm(channel_gain(theta, cfg)) / noise_variance_mf(cfg);
}

// Conductivity presets. Values are representative, not measured.
struct Medium {
  std::string name;
  double sigma_m;
};

inline const std::vector<Medium>& medium_presets() {
  static const std::vector<Medium> presets = {
      {"dry_soil", 1.0e-3},
      {"typical_soil", 1.0e-2},
      {"wet_soil", 1.0e-1},
      {"seawater", 4.0},
  };
  return presets;
}

inline std::optional<Medium> find_medium(std::string_view name) {
  for (const auto& m : medium_presets()) {
    if (m.name == name) return m;
    // short aliases: "dry", "typical", "wet"
    if (m.name.starts_with(name) && name.size() >= 3) return m;
  }
  return std::nullopt;
}

}  // namespace miisac
