#pragma once

// Derivative-free Nelder-Mead simplex minimizer over R^N.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace miisac {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tol = 1.0e-10;  // max inf-norm distance from the best vertex
  int max_iters = 2000;
};

template <std::size_t N>
struct NelderMeadResult {
  std::array<double, N> x{};
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

template <std::size_t N>
double simplex_diameter(const std::array<std::array<double, N>, N + 1>& pts, std::size_t best) {
  double d = 0.0;
  for (std::size_t i = 0; i <= N; ++i) {
    if (i == best) continue;
    for (std::size_t k = 0; k < N; ++k) d = std::max(d, std::abs(pts[i][k] - pts[best][k]));
  }
  return d;
}

/// Minimizes `f` starting from a right-angled simplex at `start` with edge lengths `step`.
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const std::array<double, N>& start,
                                const std::array<double, N>& step,
                                const NelderMeadOptions& opt = {}) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> pts;
  std::array<double, N + 1> vals;
  NelderMeadResult<N> res;

  auto eval = [&](const Point& p) {
    ++res.evaluations;
    const double v = f(p);
    return std::isnan(v) ? HUGE_VAL : v;
  };

  pts[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += step[i];
  }
  for (std::size_t i = 0; i <= N; ++i) vals[i] = eval(pts[i]);

  std::array<std::size_t, N + 1> order;
  auto sort_order = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // stable so that ties keep vertex index order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  };

  auto affine = [](const Point& c, const Point& p, double t) {
    // c + t * (p - c)
    Point out;
    for (std::size_t k = 0; k < N; ++k) out[k] = c[k] + t * (p[k] - c[k]);
    return out;
  };

  sort_order();
  while (res.iterations < opt.max_iters) {
    if (simplex_diameter<N>(pts, order[0]) < opt.tol) {
      res.converged = true;
      break;
    }
    ++res.iterations;

    const std::size_t best = order[0];
    const std::size_t worst = order[N];
    const std::size_t second_worst = order[N - 1];

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < N; ++k) centroid[k] += pts[i][k];
    }
    for (auto& c : centroid) c /= static_cast<double>(N);

    const Point xr = affine(centroid, pts[worst], -opt.reflection);
    const double fr = eval(xr);

    if (fr < vals[best]) {
      const Point xe = affine(centroid, pts[worst], -opt.reflection * opt.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second_worst]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      bool accepted = false;
      if (fr < vals[worst]) {
        // outside contraction
        const Point xc = affine(centroid, xr, opt.contraction);
        const double fc = eval(xc);
        if (fc <= fr) {
          pts[worst] = xc;
          vals[worst] = fc;
          accepted = true;
        }
      } else {
        const Point xc = affine(centroid, pts[worst], opt.contraction);
        const double fc = eval(xc);
        if (fc < vals[worst]) {
          pts[worst] = xc;
          vals[worst] = fc;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 0; i <= N; ++i) {
          if (i == best) continue;
          pts[i] = affine(pts[best], pts[i], opt.shrink);
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_order();
  }
  if (!res.converged) res.converged = simplex_diameter<N>(pts, order[0]) < opt.tol;

  res.x = pts[order[0]];
  res.value = vals[order[0]];
  return res;
}

}  // namespace miisac
