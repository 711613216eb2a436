#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "carnot/dexp.hpp"
#include "carnot/equations.hpp"
#include "carnot/finite_diff.hpp"

namespace carnot {

enum class LiftKind { normal, abnormal, none };

inline const char* to_string(LiftKind k) {
  switch (k) {
    case LiftKind::normal: return "normal";
    case LiftKind::abnormal: return "abnormal";
    case LiftKind::none: return "none";
  }
  return "none";
}

struct IntegratorConfig {
  double dt = 1e-3;
  double T = 1.0;
  int step_cap = 16;  ///< upper bound on the nilpotency class accepted

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("T must be positive");
    if (step_cap < 1) throw InputError("step_cap must be >= 1");
  }

  /// Number of RK4 steps; the horizon actually covered is steps() * dt.
  long steps() const { return std::max(1L, std::lround(T / dt)); }
};

/// Uniformly sampled curve x(t) with its controls and (optionally) a lift.
/// Row k of every matrix is the record at t0 + k * dt.
struct Trajectory {
  std::string algebra;
  int rank = 0;
  double t0 = 0.0;
  double dt = 0.0;
  Matrix x;       ///< samples x n
  Matrix gamma;   ///< samples x r
  Matrix lift;    ///< samples x n, or samples x 0 when lift_kind == none
  LiftKind lift_kind = LiftKind::none;

  int size() const { return static_cast<int>(x.rows()); }
  double time(int k) const { return t0 + k * dt; }
  UniformGrid grid() const { return {t0, dt, size()}; }
};

/// One classical fourth-order Runge-Kutta step.
template <class Rhs>
Vector rk4_step(const Rhs& f, double t, const Vector& y, double dt) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
  const Vector k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
  const Vector k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

inline ExponentialChart make_chart(const LieAlgebra& a, const IntegratorConfig& cfg) {
  cfg.validate();
  return ExponentialChart(a, cfg.step_cap);
}

}  // namespace detail

/// Normal geodesic: x' = dexpinv(x, embed(h_1..r)), h' from the normal equations.
inline Trajectory integrate_normal(const LieAlgebra& a, const Vector& x0, const Vector& h0,
                                   const IntegratorConfig& cfg) {
  const auto chart = detail::make_chart(a, cfg);
  const int n = a.dim(), r = a.rank();
  if (x0.size() != n) throw InputError("x0 must have " + std::to_string(n) + " components");
  if (h0.size() != n) throw InputError("h0 must have " + std::to_string(n) + " components");

  const auto rhs = [&](double, const Vector& y) {
    const Vector x = y.head(n), h = y.tail(n);
    Vector dy(2 * n);
    const auto d = normal_rhs(a, h);
    dy.head(n) = chart.dexpinv(x, d.gamma);
    dy.tail(n) = d.h_dot;
    return dy;
  };

  const long steps = cfg.steps();
  Trajectory tr{a.name(), r, 0.0, cfg.dt, Matrix(steps + 1, n), Matrix(steps + 1, r), Matrix(steps + 1, n),
                LiftKind::normal};
  Vector y(2 * n);
  y << x0, h0;
  for (long k = 0;; ++k) {
    tr.x.row(k) = y.head(n).transpose();
    tr.lift.row(k) = y.tail(n).transpose();
    tr.gamma.row(k) = y.segment(n, r).transpose();
    if (k == steps) break;
    y = rk4_step(rhs, tr.time(static_cast<int>(k)), y, cfg.dt);
  }
  return tr;
}

/// Controls given on a uniform grid; evaluated between samples by local
/// cubic (4-point Lagrange) interpolation so RK4 keeps its order.
struct ControlSamples {
  UniformGrid grid;
  Matrix values;  ///< grid.count x r

  Vector operator()(double t) const {
    const int m = grid.count;
    double u = (t - grid.t0) / grid.dt;
    int base = static_cast<int>(std::floor(u)) - 1;
    base = std::clamp(base, 0, m - 4);
    u -= base;
    Vector out = Vector::Zero(values.cols());
    for (int p = 0; p < 4; ++p) {
      double w = 1.0;
      for (int q = 0; q < 4; ++q)
        if (q != p) w *= (u - q) / (p - q);
      out += w * values.row(base + p).transpose();
    }
    return out;
  }
};

/// Horizontal curve: x' = dexpinv(x, embed(gamma(t))) on [t0, t0 + T].
inline Trajectory integrate_horizontal(const LieAlgebra& a, const std::function<Vector(double)>& gamma,
                                       const Vector& x0, const IntegratorConfig& cfg, double t0 = 0.0) {
  const auto chart = detail::make_chart(a, cfg);
  const int n = a.dim(), r = a.rank();
  if (x0.size() != n) throw InputError("x0 must have " + std::to_string(n) + " components");
  const auto controls = [&](double t) {
    Vector g = gamma(t);
    if (g.size() != r) throw InputError("controls must have " + std::to_string(r) + " components");
    return g;
  };
  const auto rhs = [&](double t, const Vector& x) { return chart.dexpinv(x, a.embed(controls(t))); };

  const long steps = cfg.steps();
  Trajectory tr{a.name(), r, t0, cfg.dt, Matrix(steps + 1, n), Matrix(steps + 1, r), Matrix(steps + 1, 0),
                LiftKind::none};
  Vector x = x0;
  for (long k = 0;; ++k) {
    const double t = tr.time(static_cast<int>(k));
    tr.x.row(k) = x.transpose();
    tr.gamma.row(k) = controls(t).transpose();
    if (k == steps) break;
    x = rk4_step(rhs, t, x, cfg.dt);
  }
  return tr;
}

inline Trajectory integrate_horizontal(const LieAlgebra& a, const ControlSamples& gamma, const Vector& x0,
                                       const IntegratorConfig& cfg, double t0 = 0.0) {
  cfg.validate();
  if (gamma.grid.count < 4) throw InputError("sampled controls need at least 4 samples");
  if (gamma.values.rows() != gamma.grid.count) throw InputError("control samples do not match their grid");
  if (!(gamma.grid.dt > 0.0)) throw InputError("control grid spacing must be positive");
  const double slack = 1e-9 * gamma.grid.dt;
  if (gamma.grid.t0 > t0 + slack || gamma.grid.end() < t0 + cfg.steps() * cfg.dt - slack)
    throw InputError("control samples cover [" + format_shortest(gamma.grid.t0) + ", " +
                     format_shortest(gamma.grid.end()) + "], which does not contain the integration horizon");
  return integrate_horizontal(a, std::function<Vector(double)>(gamma), x0, cfg, t0);
}

}  // namespace carnot
