#pragma once

// Independent reference implementations used to freeze expected values in
// tests. These are deliberately written as plain direct evaluations of the
// defining formulas, separate from the library code paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include "stba/trajectory.hpp"
#include "stba/types.hpp"

namespace oracle {

using stba::Trajectory3D;
using stba::TrajectorySample;
using stba::Vec3;

// sum_i  w_i * m/2 * ||x_{i+1} - x_i||^2 / (dt_i + eps)^2 * dt_i
inline double kinetic(const std::vector<double>& t, const std::vector<Vec3>& x,
                      const std::vector<double>& w, double eps, double mass = 1.0) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    const double d2 = (x[i + 1] - x[i]).squaredNorm();
    total += w[i] * 0.5 * mass * d2 / ((dt + eps) * (dt + eps)) * dt;
  }
  return total;
}

// sum over interior samples of w_i * ||m * a_i||^2 * (t_{i+1} - t_{i-1}) / 2,
// a_i the divided-difference acceleration.
inline double force(const std::vector<double>& t, const std::vector<Vec3>& x,
                    const std::vector<double>& w, double eps, double mass = 1.0) {
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const double h1 = t[i] - t[i - 1] + eps;
    const double h2 = t[i + 1] - t[i] + eps;
    const Vec3 a = 2.0 * ((x[i + 1] - x[i]) / h2 - (x[i] - x[i - 1]) / h1) / (h1 + h2);
    total += w[i] * (mass * a).squaredNorm() * 0.5 * (t[i + 1] - t[i - 1]);
  }
  return total;
}

// sum_i (w_i * m/2 * v_i^2 - m*g*h_i) * dt_i with h measured along -gravity.
inline double action(const std::vector<double>& t, const std::vector<Vec3>& x,
                     const std::vector<double>& w, double eps, const Vec3& gravity,
                     double mass = 1.0) {
  const double g = gravity.norm();
  const Vec3 up = g > 0.0 ? Vec3(-gravity / g) : Vec3::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    const double v2 = (x[i + 1] - x[i]).squaredNorm() / ((dt + eps) * (dt + eps));
    total += (w[i] * 0.5 * mass * v2 - mass * g * up.dot(x[i])) * dt;
  }
  return total;
}

// Midpoint-rule integral of a scalar function, used to freeze continuous
// reference values for discretization-convergence checks.
inline double integrate(const std::function<double(double)>& f, double a, double b, int n) {
  double total = 0.0;
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) total += f(a + (i + 0.5) * h);
  return total * h;
}

// Uniformly samples a curve into a trajectory with unit weights.
inline Trajectory3D sample_curve(const std::function<Vec3(double)>& curve, double t0,
                                 double t1, int n, stba::PointId id = 0) {
  std::vector<TrajectorySample> samples(n);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * i / (n - 1);
    samples[i].time = t;
    samples[i].position = curve(t);
    samples[i].weight = 1.0;
  }
  return Trajectory3D(id, std::move(samples));
}

// Counts proper crossings of a polyline with itself after projecting onto
// the plane spanned by axes (ax, ay). Adjacent segments are skipped.
inline int self_intersections_2d(const std::vector<Vec3>& pts, int ax = 0, int ay = 1) {
  auto orient = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    const double v = (b[ax] - a[ax]) * (c[ay] - a[ay]) - (b[ay] - a[ay]) * (c[ax] - a[ax]);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
  };
  auto crosses = [&](std::size_t i, std::size_t j) {
    const Vec3 &a = pts[i], &b = pts[i + 1], &c = pts[j], &d = pts[j + 1];
    return orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0;
  };
  int count = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    for (std::size_t j = i + 2; j + 1 < pts.size(); ++j) {
      if (crosses(i, j)) ++count;
    }
  }
  return count;
}

}  // namespace oracle
