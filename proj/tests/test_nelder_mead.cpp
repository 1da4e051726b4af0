#include <gtest/gtest.h>

#include <cmath>

#include "miisac/nelder_mead.hpp"

using miisac::nelder_mead;
using miisac::NelderMeadOptions;

TEST(NelderMead, QuadraticBowl) {
  auto f = [](const std::array<double, 2>& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 10.0 * (x[1] + 2.0) * (x[1] + 2.0);
  };
  const auto res = nelder_mead<2>(f, {5.0, 5.0}, {1.0, 1.0});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 1.0, 1e-9);
  EXPECT_NEAR(res.x[1], -2.0, 1e-9);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const std::array<double, 2>& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  NelderMeadOptions opt;
  opt.max_iters = 5000;
  const auto res = nelder_mead<2>(f, {-1.2, 1.0}, {0.5, 0.5}, opt);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 1.0, 1e-7);
  EXPECT_NEAR(res.x[1], 1.0, 1e-7);
}

TEST(NelderMead, OneDimensional) {
  auto f = [](const std::array<double, 1>& x) { return (x[0] - 0.3) * (x[0] - 0.3) * (2.0 + std::sin(x[0])); };
  const auto res = nelder_mead<1>(f, {4.0}, {1.0});
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 0.3, 1e-9);
}

TEST(NelderMead, IterationCapReportsNonConvergence) {
  auto f = [](const std::array<double, 2>& x) { return x[0] * x[0] + x[1] * x[1]; };
  NelderMeadOptions opt;
  opt.max_iters = 5;
  const auto res = nelder_mead<2>(f, {10.0, 10.0}, {1.0, 1.0}, opt);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 5);
}

TEST(NelderMead, NanTreatedAsInfinite) {
  auto f = [](const std::array<double, 1>& x) { return x[0] < 0.0 ? std::nan("") : (x[0] - 2.0) * (x[0] - 2.0); };
  const auto res = nelder_mead<1>(f, {0.5}, {0.25});
  EXPECT_NEAR(res.x[0], 2.0, 1e-8);
}

TEST(NelderMead, Deterministic) {
  auto f = [](const std::array<double, 2>& x) { return std::sin(3 * x[0]) + x[0] * x[0] + std::cos(x[1]) * x[1]; };
  const auto a = nelder_mead<2>(f, {0.7, -0.4}, {0.3, 0.3});
  const auto b = nelder_mead<2>(f, {0.7, -0.4}, {0.3, 0.3});
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evaluations, b.evaluations);
}
