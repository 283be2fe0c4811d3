#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Small quadrature toolkit: Gauss-Legendre rules with runtime node counts and
// an adaptive Gauss-Kronrod 7-15 integrator for finite intervals.

namespace rsk {

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence.
inline QuadRule gauss_legendre(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(3.141592653589793238462643383 * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

inline const QuadRule& gauss_legendre_cached(int n) {
  static const QuadRule gl16 = gauss_legendre(16);
  static const QuadRule gl64 = gauss_legendre(64);
  if (n == 16) return gl16;
  if (n == 64) return gl64;
  throw std::invalid_argument("gauss_legendre_cached: only 16 and 64 cached");
}

template <class F>
double integrate_gl(const F& f, double a, double b, const QuadRule& rule) {
  const double c = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(m + c * rule.nodes[i]);
  return c * s;
}

namespace detail {

// Gauss-Kronrod 7-15 abscissae/weights on [-1, 1] (symmetric half listed).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
void gk15(const F& f, double a, double b, double& value, double& err) {
  const double c = 0.5 * (b - a), m = 0.5 * (a + b);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = c * kGK15Nodes[i];
    const double fv = (i == 7) ? f(m) : f(m - x) + f(m + x);
    resk += kGK15Weights[i] * fv;
    if (i % 2 == 1) resg += kG7Weights[i / 2] * fv;
  }
  value = c * resk;
  err = std::abs(c * (resk - resg));
}

}  // namespace detail

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

// Adaptive GK15 with interval bisection. Throws on non-convergence with the
// interval diagnostics embedded in the message.
template <class F>
AdaptiveResult integrate_adaptive(const F& f, double a, double b,
                                  double abs_tol, int max_intervals = 20000) {
  struct Seg {
    double a, b, value, error;
  };
  double v0, e0;
  detail::gk15(f, a, b, v0, e0);
  std::vector<Seg> segs{{a, b, v0, e0}};
  AdaptiveResult out;
  out.evaluations = 15;
  for (int iter = 0; iter < max_intervals; ++iter) {
    std::size_t worst = 0;
    double total_err = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total_err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (total_err <= abs_tol) break;
    const Seg s = segs[worst];
    if (s.b - s.a < 1e-14 * (std::abs(s.a) + std::abs(s.b) + 1.0)) {
      throw std::runtime_error(
          "integrate_adaptive: interval underflow near x = " +
          std::to_string(0.5 * (s.a + s.b)) + ", residual error " +
          std::to_string(total_err));
    }
    const double mid = 0.5 * (s.a + s.b);
    Seg left{s.a, mid, 0, 0}, right{mid, s.b, 0, 0};
    detail::gk15(f, left.a, left.b, left.value, left.error);
    detail::gk15(f, right.a, right.b, right.value, right.error);
    out.evaluations += 30;
    segs[worst] = left;
    segs.push_back(right);
    if (segs.size() >= static_cast<std::size_t>(max_intervals)) {
      double err_now = 0.0;
      for (const auto& sg : segs) err_now += sg.error;
      if (err_now > abs_tol)
        throw std::runtime_error(
            "integrate_adaptive: no convergence after " +
            std::to_string(segs.size()) + " intervals, residual error " +
            std::to_string(err_now) + " > tol " + std::to_string(abs_tol));
      break;
    }
  }
  for (const auto& s : segs) {
    out.value += s.value;
    out.error += s.error;
  }
  return out;
}

}  // namespace rsk
