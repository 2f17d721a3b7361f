// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// The control stack above the impedance-controlled plant:
//
//  * a direct force controller (PI on the wrench error, masked by the task
//    specification so only force-controlled axes move),
//  * a residual-action optimizer that searches a discretized neighborhood of
//    the PI setpoint and picks the candidate whose predicted next force best
//    matches the reference, under a magnitude + variation regularizer.
//
// Wrench convention: measured wrenches are the loads exerted on the
// environment, so pressing into the surface gives a negative z component
// (h_e_z = -f_z with f_z >= 0 the compression). Force references follow the
// same convention. That is what makes the PI law stable with positive gains
// while the z axis points away from the surface.

#pragma once

#include <cstdint>
#include <optional>

#include "ftlab/common.hpp"
#include "ftlab/model.hpp"
#include "ftlab/plant.hpp"

namespace ftlab::ctl {

struct DfcConfig {
  double K_P = 1e-6;               // m/N
  double K_I = 2e-3;               // m/(N s)
  Vec6 gamma{0, 0, 1, 0, 0, 0};    // task specification mask, entries 0/1
  Vec6 x_r{};                      // reference pose
  double integrator_limit = 5e4;   // N s, symmetric anti-windup clamp

  void validate() const;
};

struct DfcState {
  Vec6 integral{};    // accumulated wrench error, N s
  Vec6 prev_error{};  // last wrench error, for trapezoidal accumulation
  Vec6 x_c_prev{};    // previously selected residual action
};

/// Compliance wrench K_d * delta_x - D_d * x_dot (damping opposes velocity).
/// Diagnostic only: the plant surrogate embeds this law.
Vec6 impedance_wrench(const Vec6& delta_x, const Vec6& x_dot,
                      const sim::ImpedanceGains& gains);

struct DfcResult {
  Vec6 x_f;
  DfcState st;
};

/// One PI step: x_f_i = x_r_i + gamma_i (K_P dh_i + K_I integral_i) with
/// dh = h_r - h_e, trapezoidal integral accumulation and anti-windup clamp.
/// Axes with gamma_i = 0 return x_r_i exactly.
DfcResult dfc_step(const Vec6& h_r, const Vec6& h_e, const DfcConfig& cfg,
                   const DfcState& st, double dt);

struct VaicamParams {
  Vec6 alpha{};           // action-magnitude penalty weights
  Vec6 beta{};            // action-variation penalty weights
  double rho = 0.003;     // m, search radius
  int n_candidates = 21;  // odd, so the PI setpoint itself is a candidate

  void validate() const;
};

/// sum_i alpha_i x_c_i^2 + sum_i beta_i |x_c_i - x_c_prev_i|.
double regularizer(const Vec6& x_c, const Vec6& x_c_prev,
                   const VaicamParams& params);

struct VaicamChoice {
  double x_c_z = 0.0;        // selected setpoint on the controlled axis
  double cost = 0.0;         // value of the minimized objective
  double predicted_f_z = 0.0;
};

/// Minimizes |f_r - f_hat(s, x_c)| + regularizer over n_candidates points
/// uniformly spaced in [x_f_z - rho, x_f_z + rho] on the controlled (z)
/// axis. f_hat is the ensemble's one-step force prediction. Ties break
/// toward the candidate closest to x_f, then toward the lower value. With
/// rho = 0 the PI setpoint is returned untouched, model or no model.
VaicamChoice vaicam_select(const Vec6& x_f, const nn::StateSample& s,
                           double f_r, const DfcState& st,
                           const VaicamParams& params,
                           const nn::EnsembleModel& model, nn::Workspace& ws);

// ---------------------------------------------------------------------------
// Closed-loop session

enum class ControllerKind { kDfc, kOracle, kVaicam };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& s);

struct ControllerParams {
  DfcConfig dfc;
  VaicamParams vaicam;
  double contact_threshold = 0.5;  // N
  int contact_debounce = 5;        // consecutive steps above threshold
};

/// Drives one rollout's control decisions: position tracking until contact
/// is established (threshold held for a debounce window), then the force
/// loop, optionally refined by the residual-action optimizer.
class ForceController {
 public:
  ForceController(ControllerKind kind, const ControllerParams& params,
                  const nn::EnsembleModel* model);

  struct Output {
    Vec3 x_cmd;            // setpoint handed to the plant
    double x_f_z = 0.0;    // PI setpoint on z (reference pose before contact)
    double x_c_star_z = 0.0;  // selected setpoint on z
    double cost = 0.0;     // optimizer objective at the selection (NaN if n/a)
    bool active = false;
  };

  Output step(const sim::PlantState& ps, const Vec3& x_r, double f_r,
              double dt);

  bool active() const { return active_; }

 private:
  ControllerKind kind_;
  ControllerParams params_;
  const nn::EnsembleModel* model_;
  DfcState st_{};
  nn::Workspace ws_;
  bool active_ = false;
  bool prev_action_valid_ = false;
  int debounce_ = 0;
};

}  // namespace ftlab::ctl
