#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "miisac/estimation.hpp"
#include "miisac/montecarlo.hpp"

using namespace miisac;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double log_uniform(std::mt19937_64& g, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(g));
}

}  // namespace

TEST(MatchedFilter, NoiselessIdentity) {
  const ComplexGain h{0.5, 0.5};
  PilotBlock b;
  for (int i = 0; i < 16; ++i) {
    const ComplexGain x = std::polar(1.0 + 0.1 * i, 0.3 * i);
    b.symbols.push_back(x);
    b.received.push_back(h * x);
  }
  const ComplexGain est = matched_filter(b);
  EXPECT_NEAR(est.real(), 0.5, 1e-15);
  EXPECT_NEAR(est.imag(), 0.5, 1e-15);
}

TEST(MatchedFilter, ConstantPilotsReduceToMean) {
  const double c = 2.5;
  PilotBlock b;
  ComplexGain sum{0, 0};
  std::mt19937_64 g(4);
  std::normal_distribution<double> n;
  for (int i = 0; i < 10; ++i) {
    b.symbols.emplace_back(c, 0.0);
    b.received.emplace_back(n(g), n(g));
    sum += b.received.back();
  }
  const ComplexGain expect = sum / (10.0 * c);
  EXPECT_LT(std::abs(matched_filter(b) - expect), 1e-15);
}

TEST(MatchedFilter, DegenerateBlocks) {
  PilotBlock zero{{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}};
  EXPECT_THROW(matched_filter(zero), DegeneratePilotError);
  PilotBlock empty;
  EXPECT_THROW(matched_filter(empty), DegeneratePilotError);
  PilotBlock mismatched{{{1, 0}}, {{1, 0}, {2, 0}}};
  EXPECT_THROW(matched_filter(mismatched), DegeneratePilotError);
}

TEST(MatchedFilter, NoiseLawOverPilotBlocks) {
  const LinkConfig cfg;
  const Theta t{10.0, 0.01};
  const ComplexGain h = channel_gain(t, cfg);
  constexpr int draws = 10000;
  ComplexGain mean{0, 0};
  std::vector<ComplexGain> est;
  est.reserve(draws);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(99, static_cast<std::uint64_t>(i));
    est.push_back(matched_filter(simulate_pilot_block(t, cfg, rng)));
    mean += est.back();
  }
  mean /= double(draws);
  double var = 0.0;
  for (const auto& e : est) var += std::norm(e - h);
  var /= draws;
  EXPECT_LT(rel(var, noise_variance_mf(cfg)), 0.05);
  // unbiased: mean error well within 4 standard errors
  EXPECT_LT(std::abs(mean - h), 4.0 * std::sqrt(noise_variance_mf(cfg) / draws));
}

TEST(Nll, ZeroAtTruthPositiveElsewhere) {
  const LinkConfig cfg;
  const Theta t{10.0, 0.01};
  const ComplexGain h = channel_gain(t, cfg);
  EXPECT_EQ(nll(t, h, cfg), 0.0);
  EXPECT_GT(nll({10.1, 0.01}, h, cfg), 0.0);
  EXPECT_GT(nll({10.0, 0.0101}, h, cfg), 0.0);
}

TEST(Nll, ArgminInvariantUnderRescaling) {
  // Scaling L or P_tx rescales the objective by a constant factor only.
  LinkConfig a;
  LinkConfig b = a;
  b.pilots_l = 7;
  b.p_tx = 0.02;
  const ComplexGain hm = channel_gain({6.0, 0.05}, a) * ComplexGain(1.001, 0.002);
  const double ratio = nll({5.0, 0.04}, hm, b) / nll({5.0, 0.04}, hm, a);
  for (const Theta t : {Theta{3.0, 0.2}, Theta{9.0, 0.001}, Theta{6.1, 0.049}})
    EXPECT_LT(rel(nll(t, hm, b) / nll(t, hm, a), ratio), 1e-12);

  MleConfig m;
  const auto ea = mle_joint(hm, a, m);
  const auto eb = mle_joint(hm, b, m);
  EXPECT_LT(rel(ea.theta_hat.r, eb.theta_hat.r), 1e-7);
  EXPECT_LT(rel(ea.theta_hat.sigma_m, eb.theta_hat.sigma_m), 1e-6);
}

TEST(Nll, NoSecondBasinOnDenseGrid) {
  // Noisy observation at default SNR. Every grid local minimum whose value is
  // within 1e-3 of the grid minimum must lie within a few cells of the MLE
  // (the valley is narrow relative to the grid spacing).
  const LinkConfig cfg;
  const MleConfig m;
  CounterRng rng(5, 0);
  const Theta truth{10.0, 0.01};
  const ComplexGain hm = draw_observation(truth, cfg, rng);
  ASSERT_GT(10 * std::log10(snr_mf(truth, cfg)), 10.0);
  const auto est = mle_joint(hm, cfg, m);

  constexpr int n = 400;
  const double lr0 = std::log(m.r_bounds.lo), lr1 = std::log(m.r_bounds.hi);
  const double ls0 = std::log(m.sigma_bounds.lo), ls1 = std::log(m.sigma_bounds.hi);
  const double dr = (lr1 - lr0) / (n - 1), ds = (ls1 - ls0) / (n - 1);
  std::vector<double> vals(n * n);
  double best = HUGE_VAL;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      vals[i * n + k] = nll({std::exp(lr0 + i * dr), std::exp(ls0 + k * ds)}, hm, cfg);
      best = std::min(best, vals[i * n + k]);
    }
  EXPECT_GE(best, est.nll_value);

  int basins = 0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double v = vals[i * n + k];
      if (v > best + 1e-3) continue;
      bool local_min = true;
      for (int di = -1; di <= 1 && local_min; ++di)
        for (int dk = -1; dk <= 1; ++dk) {
          const int a = i + di, b = k + dk;
          if ((di || dk) && a >= 0 && a < n && b >= 0 && b < n && vals[a * n + b] < v) {
            local_min = false;
            break;
          }
        }
      if (!local_min) continue;
      ++basins;
      EXPECT_LT(std::abs(lr0 + i * dr - std::log(est.theta_hat.r)), 4 * dr);
      EXPECT_LT(std::abs(ls0 + k * ds - std::log(est.theta_hat.sigma_m)), 4 * ds);
    }
  EXPECT_EQ(basins, 1);
}

TEST(MleJoint, NoiselessRecoveryAtDefaultPoint) {
  const LinkConfig cfg;
  const auto est = mle_joint(channel_gain({10.0, 0.01}, cfg), cfg, MleConfig{});
  EXPECT_TRUE(est.converged);
  EXPECT_FALSE(est.on_boundary);
  EXPECT_EQ(est.starts_used, 16);
  EXPECT_LT(rel(est.theta_hat.r, 10.0), 1e-6);
  EXPECT_LT(rel(est.theta_hat.sigma_m, 0.01), 1e-6);
  EXPECT_GE(est.nll_value, 0.0);
}

TEST(MleJoint, NoiselessRecoveryRandomTruths) {
  const LinkConfig cfg;
  const MleConfig m;
  std::mt19937_64 g(21);
  for (int i = 0; i < 100; ++i) {
    const Theta t{log_uniform(g, 0.6, 90.0), log_uniform(g, 1.2e-4, 0.9)};
    const auto est = mle_joint(channel_gain(t, cfg), cfg, m);
    EXPECT_TRUE(est.converged);
    EXPECT_LT(rel(est.theta_hat.r, t.r), 1e-5) << t.r << ' ' << t.sigma_m;
    EXPECT_LT(rel(est.theta_hat.sigma_m, t.sigma_m), 1e-5) << t.r << ' ' << t.sigma_m;
  }
}

TEST(MleJoint, StartDensityRobustAtHighSnr) {
  const LinkConfig cfg;
  CounterRng rng(8, 0);
  const ComplexGain hm = draw_observation({4.0, 0.05}, cfg, rng);
  MleConfig m4, m8;
  m8.starts_per_axis = 8;
  const auto a = mle_joint(hm, cfg, m4);
  const auto b = mle_joint(hm, cfg, m8);
  EXPECT_EQ(b.starts_used, 64);
  // both within 10 * simplex_tol in log space
  EXPECT_LT(std::abs(std::log(a.theta_hat.r / b.theta_hat.r)), 10 * m4.simplex_tol);
  EXPECT_LT(std::abs(std::log(a.theta_hat.sigma_m / b.theta_hat.sigma_m)), 10 * m4.simplex_tol);
}

TEST(MleJoint, EstimateStaysInsideBounds) {
  const LinkConfig cfg;
  MleConfig m;
  m.r_bounds = {1.0, 5.0};
  // truth outside the r bounds: estimate is clamped and flagged
  const auto est = mle_joint(channel_gain({20.0, 0.01}, cfg), cfg, m);
  EXPECT_GE(est.theta_hat.r, m.r_bounds.lo);
  EXPECT_LE(est.theta_hat.r, m.r_bounds.hi);
  EXPECT_GE(est.theta_hat.sigma_m, m.sigma_bounds.lo);
  EXPECT_LE(est.theta_hat.sigma_m, m.sigma_bounds.hi);
  EXPECT_TRUE(est.on_boundary);
}

TEST(MleJoint, IterationCapGivesNonConvergenceFlag) {
  const LinkConfig cfg;
  MleConfig m;
  m.max_iters = 3;
  const auto est = mle_joint(channel_gain({10.0, 0.01}, cfg), cfg, m);
  EXPECT_FALSE(est.converged);
  EXPECT_LE(est.iterations_total, 3 * 16);
}

TEST(MleJoint, InvalidConfigRejected) {
  MleConfig m;
  m.r_bounds = {5.0, 1.0};
  EXPECT_THROW(mle_joint({1e-7, 0}, LinkConfig{}, m), ConfigError);
  m = {};
  m.starts_per_axis = 0;
  EXPECT_THROW(mle_joint({1e-7, 0}, LinkConfig{}, m), ConfigError);
  m = {};
  m.simplex_tol = 0.0;
  EXPECT_THROW(mle_joint({1e-7, 0}, LinkConfig{}, m), ConfigError);
}

TEST(MleConditional, NoiselessRecovery) {
  const LinkConfig cfg;
  const auto est = mle_conditional(channel_gain({10.0, 0.01}, cfg), 0.01, cfg, MleConfig{});
  EXPECT_TRUE(est.converged);
  EXPECT_LT(rel(est.theta_hat.r, 10.0), 1e-6);
  EXPECT_EQ(est.theta_hat.sigma_m, 0.01);
  EXPECT_EQ(est.starts_used, 4);
}

TEST(MleConditional, WrongPinnedConductivityBiasesRange) {
  const LinkConfig cfg;
  const auto est = mle_conditional(channel_gain({10.0, 0.01}, cfg), 0.02, cfg, MleConfig{});
  EXPECT_TRUE(est.converged);
  EXPECT_GT(std::abs(est.theta_hat.r - 10.0), 1e-3);
  EXPECT_GT(est.nll_value, 0.0);
}

TEST(MleConditional, RejectsNonPositiveSigma) {
  EXPECT_THROW(mle_conditional({1e-7, 0}, 0.0, LinkConfig{}, MleConfig{}), DomainError);
}
