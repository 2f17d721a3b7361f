// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/plant.hpp"

#include <algorithm>
#include <cmath>

namespace ftlab::sim {

namespace {

// Regularization speed for the Coulomb drag direction; keeps the friction
// force smooth through zero tangential velocity.
constexpr double kFrictionVelEps = 1e-4;  // m/s

struct Derivative {
  Vec3 dx;   // velocity
  Vec3 dv;   // acceleration
};

Derivative dynamics(const Vec3& x, const Vec3& xd, const Vec3& x_c,
                    const ImpedanceGains& g, const EnvironmentModel& env) {
  const double v_t = tangential_speed(xd);
  const double f_c = contact_force(x.z, xd.z, v_t, env);

  // Coulomb drag opposing sliding, proportional to the normal load.
  const double v_reg = std::sqrt(xd.x * xd.x + xd.y * xd.y +
                                 kFrictionVelEps * kFrictionVelEps);
  const double drag = env.mu * f_c / v_reg;

  Derivative d;
  d.dx = xd;
  d.dv.x = (g.K_d[0] * (x_c.x - x.x) - g.D_d[0] * xd.x - drag * xd.x) / g.M_v;
  d.dv.y = (g.K_d[1] * (x_c.y - x.y) - g.D_d[1] * xd.y - drag * xd.y) / g.M_v;
  d.dv.z = (g.K_d[2] * (x_c.z - x.z) - g.D_d[2] * xd.z + f_c) / g.M_v;
  return d;
}

inline Vec3 axpy(const Vec3& a, double h, const Vec3& b) {
  return {a.x + h * b.x, a.y + h * b.y, a.z + h * b.z};
}

}  // namespace

ImpedanceGains make_gains(double k_trans, double k_rot, double xi,
                          double m_v) {
  if (!(k_trans > 0.0) || !(k_rot > 0.0) || !(xi > 0.0) || !(m_v > 0.0))
    throw ConfigError("impedance gain parameters must be positive");
  ImpedanceGains g;
  g.xi = xi;
  g.M_v = m_v;
  for (int i = 0; i < 3; ++i) g.K_d[i] = k_trans;
  for (int i = 3; i < 6; ++i) g.K_d[i] = k_rot;
  for (int i = 0; i < 6; ++i) g.D_d[i] = xi * std::sqrt(g.K_d[i]);
  return g;
}

double tangential_speed(const Vec3& x_dot) {
  return std::sqrt(x_dot.x * x_dot.x + x_dot.y * x_dot.y);
}

double contact_force(double z, double z_dot, double v,
                     const EnvironmentModel& env) {
  if (!std::isfinite(z) || !std::isfinite(z_dot) || !std::isfinite(v))
    throw IntegrationFault("non-finite state in contact force evaluation");
  const double penetration = env.z_surface - z;
  if (penetration <= 0.0) return 0.0;
  const double f =
      env.k_e * penetration * (1.0 + env.c_v * v) + env.d_e * (-z_dot);
  return std::max(0.0, f);
}

PlantState step(const PlantState& state, const Vec3& x_c, double dt,
                const ImpedanceGains& gains, const EnvironmentModel& env) {
  const double k_max = *std::max_element(gains.K_d.begin(), gains.K_d.end());
  const double omega_n = std::sqrt(k_max / gains.M_v);
  if (!(dt > 0.0) || dt > 2.0 / omega_n)
    throw ConfigError("dt violates the integrator stability guard");

  const Vec3& x0 = state.x;
  const Vec3& v0 = state.x_dot;

  const Derivative k1 = dynamics(x0, v0, x_c, gains, env);
  const Derivative k2 = dynamics(axpy(x0, 0.5 * dt, k1.dx),
                                 axpy(v0, 0.5 * dt, k1.dv), x_c, gains, env);
  const Derivative k3 = dynamics(axpy(x0, 0.5 * dt, k2.dx),
                                 axpy(v0, 0.5 * dt, k2.dv), x_c, gains, env);
  const Derivative k4 =
      dynamics(axpy(x0, dt, k3.dx), axpy(v0, dt, k3.dv), x_c, gains, env);

  PlantState next;
  const double w = dt / 6.0;
  next.x.x = x0.x + w * (k1.dx.x + 2.0 * k2.dx.x + 2.0 * k3.dx.x + k4.dx.x);
  next.x.y = x0.y + w * (k1.dx.y + 2.0 * k2.dx.y + 2.0 * k3.dx.y + k4.dx.y);
  next.x.z = x0.z + w * (k1.dx.z + 2.0 * k2.dx.z + 2.0 * k3.dx.z + k4.dx.z);
  next.x_dot.x = v0.x + w * (k1.dv.x + 2.0 * k2.dv.x + 2.0 * k3.dv.x + k4.dv.x);
  next.x_dot.y = v0.y + w * (k1.dv.y + 2.0 * k2.dv.y + 2.0 * k3.dv.y + k4.dv.y);
  next.x_dot.z = v0.z + w * (k1.dv.z + 2.0 * k2.dv.z + 2.0 * k3.dv.z + k4.dv.z);
  next.t = state.t + dt;

  if (!all_finite(next.x) || !all_finite(next.x_dot))
    throw IntegrationFault("plant state diverged");

  next.f_z = contact_force(next.x.z, next.x_dot.z,
                           tangential_speed(next.x_dot), env);
  return next;
}

}  // namespace ftlab::sim
