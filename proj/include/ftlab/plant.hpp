// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale surrogate of an impedance-controlled end-effector in contact
// with a compliant surface. Under ideal dynamics compensation the closed
// loop is a task-space mass-spring-damper, which is what this module
// integrates directly:
//
//   M_v * xdd = K_d (x_c - x) - D_d * xd + f_ext
//
// with f_ext the unilateral contact force on z plus Coulomb friction drag on
// the xy (sliding) plane. The z axis points away from the surface.

#pragma once

#include "ftlab/common.hpp"

namespace ftlab::sim {

struct EnvironmentModel {
  double z_surface = 0.0;  // m
  double k_e = 1e5;        // N/m
  double d_e = 300.0;      // N s/m
  double c_v = 0.5;        // s/m, tangential speed coupling on stiffness
  double mu = 0.2;         // Coulomb friction coefficient

  void validate() const {
    if (!(k_e > 0.0) || !(d_e >= 0.0) || !(c_v >= 0.0) || !(mu >= 0.0) ||
        !std::isfinite(z_surface))
      throw ConfigError("invalid environment parameters");
  }
};

struct ImpedanceGains {
  Vec6 K_d{};   // diagonal stiffness, translational then rotational entries
  Vec6 D_d{};   // diagonal damping
  double xi = 1.0;   // damping ratio used to derive D_d
  double M_v = 1.0;  // virtual task-space mass, kg

  void validate() const {
    for (int i = 0; i < 6; ++i)
      if (!(K_d[i] > 0.0) || !(D_d[i] > 0.0))
        throw ConfigError("impedance gains must be positive");
    if (!(M_v > 0.0)) throw ConfigError("virtual mass must be positive");
  }
};

/// Builds gains with D_d,i = xi * sqrt(K_d,i).
ImpedanceGains make_gains(double k_trans, double k_rot, double xi, double m_v);

struct PlantState {
  Vec3 x{};      // position, m
  Vec3 x_dot{};  // velocity, m/s
  double f_z = 0.0;  // normal contact force, N (compression, >= 0)
  double t = 0.0;    // s
};

/// Tangential (in-plane) speed sqrt(vx^2 + vy^2).
double tangential_speed(const Vec3& x_dot);

/// Unilateral spring-damper contact: zero above the surface, otherwise
///   max(0, k_e * penetration * (1 + c_v * v) + d_e * (-z_dot))
/// so the effective stiffness grows with tangential speed.
double contact_force(double z, double z_dot, double v,
                     const EnvironmentModel& env);

/// Advances one control period with fixed-step RK4. The returned f_z is the
/// contact force at the new state. Throws ConfigError when dt violates the
/// stability guard dt <= 2 / sqrt(max K_d / M_v), IntegrationFault when the
/// result is not finite.
PlantState step(const PlantState& state, const Vec3& x_c, double dt,
                const ImpedanceGains& gains, const EnvironmentModel& env);

}  // namespace ftlab::sim
