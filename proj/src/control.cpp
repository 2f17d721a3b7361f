// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ftlab::ctl {

void DfcConfig::validate() const {
  for (double g : gamma)
    if (g != 0.0 && g != 1.0)
      throw ConfigError("task specification entries must be 0 or 1");
  if (!(K_P >= 0.0) || !(K_I >= 0.0))
    throw ConfigError("force controller gains must be non-negative");
  if (!(integrator_limit > 0.0))
    throw ConfigError("integrator limit must be positive");
}

void VaicamParams::validate() const {
  if (!(rho >= 0.0)) throw ConfigError("search radius must be non-negative");
  if (n_candidates < 1 || n_candidates % 2 == 0)
    throw ConfigError("candidate count must be odd and >= 1");
  for (int i = 0; i < 6; ++i)
    if (!(alpha[i] >= 0.0) || !(beta[i] >= 0.0))
      throw ConfigError("regularizer weights must be non-negative");
}

Vec6 impedance_wrench(const Vec6& delta_x, const Vec6& x_dot,
                      const sim::ImpedanceGains& gains) {
  Vec6 h;
  for (int i = 0; i < 6; ++i)
    h[i] = gains.K_d[i] * delta_x[i] - gains.D_d[i] * x_dot[i];
  return h;
}

DfcResult dfc_step(const Vec6& h_r, const Vec6& h_e, const DfcConfig& cfg,
                   const DfcState& st, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  DfcResult res;
  res.st = st;
  for (int i = 0; i < 6; ++i) {
    const double err = h_r[i] - h_e[i];
    double integral =
        st.integral[i] + 0.5 * dt * (err + st.prev_error[i]);
    integral = std::clamp(integral, -cfg.integrator_limit,
                          cfg.integrator_limit);
    res.st.integral[i] = integral;
    res.st.prev_error[i] = err;
    res.x_f[i] = cfg.x_r[i] + cfg.gamma[i] * (cfg.K_P * err + cfg.K_I * integral);
  }
  return res;
}

double regularizer(const Vec6& x_c, const Vec6& x_c_prev,
                   const VaicamParams& params) {
  double cost = 0.0;
  for (int i = 0; i < 6; ++i) {
    cost += params.alpha[i] * x_c[i] * x_c[i];
    cost += params.beta[i] * std::abs(x_c[i] - x_c_prev[i]);
  }
  return cost;
}

VaicamChoice vaicam_select(const Vec6& x_f, const nn::StateSample& s,
                           double f_r, const DfcState& st,
                           const VaicamParams& params,
                           const nn::EnsembleModel& model, nn::Workspace& ws) {
  params.validate();
  if (params.rho == 0.0) {
    VaicamChoice c;
    c.x_c_z = x_f[2];
    c.cost = std::numeric_limits<double>::quiet_NaN();
    c.predicted_f_z = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  if (!model.trained) throw ModelNotReady("optimizer requires a trained model");

  const int n = params.n_candidates;
  const int idim = model.in_dim();
  std::vector<double> candidates(n);
  if (n == 1) {
    candidates[0] = x_f[2];
  } else {
    for (int i = 0; i < n; ++i)
      candidates[i] =
          x_f[2] + params.rho * (2.0 * i / static_cast<double>(n - 1) - 1.0);
  }

  std::vector<double> inputs(static_cast<std::size_t>(n) * idim);
  for (int i = 0; i < n; ++i)
    nn::featurize(s, candidates[i], model.state_mode,
                  inputs.data() + static_cast<std::size_t>(i) * idim);
  std::vector<double> deltas(static_cast<std::size_t>(n) * model.out_dim());
  nn::predict_delta_batch(model, inputs.data(), n, ws, deltas.data());

  const int f_idx = nn::force_index(model.state_mode);
  VaicamChoice best;
  double best_dist = std::numeric_limits<double>::infinity();
  bool first = true;
  Vec6 cand_vec = x_f;
  for (int i = 0; i < n; ++i) {
    const double f_hat =
        s.f_z + deltas[static_cast<std::size_t>(i) * model.out_dim() + f_idx];
    cand_vec[2] = candidates[i];
    const double cost =
        std::abs(f_r - f_hat) + regularizer(cand_vec, st.x_c_prev, params);
    const double dist = std::abs(candidates[i] - x_f[2]);
    const bool better =
        first || cost < best.cost ||
        (cost == best.cost &&
         (dist < best_dist || (dist == best_dist && candidates[i] < best.x_c_z)));
    if (better) {
      best.x_c_z = candidates[i];
      best.cost = cost;
      best.predicted_f_z = f_hat;
      best_dist = dist;
      first = false;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kDfc:
      return "dfc";
    case ControllerKind::kOracle:
      return "oracle";
    case ControllerKind::kVaicam:
      return "vaicam";
  }
  return "?";
}

ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "dfc") return ControllerKind::kDfc;
  if (s == "oracle") return ControllerKind::kOracle;
  if (s == "vaicam") return ControllerKind::kVaicam;
  throw FormatError("unknown controller: '" + s + "'");
}

ForceController::ForceController(ControllerKind kind,
                                 const ControllerParams& params,
                                 const nn::EnsembleModel* model)
    : kind_(kind), params_(params), model_(model) {
  params_.dfc.validate();
  params_.vaicam.validate();
  if (kind_ != ControllerKind::kDfc && params_.vaicam.rho > 0.0 &&
      (model_ == nullptr || !model_->trained))
    throw ModelNotReady("controller '" + to_string(kind_) +
                        "' requires a trained model");
}

ForceController::Output ForceController::step(const sim::PlantState& ps,
                                              const Vec3& x_r, double f_r,
                                              double dt) {
  Output out;
  if (!active_) {
    debounce_ = ps.f_z > params_.contact_threshold ? debounce_ + 1 : 0;
    if (debounce_ >= params_.contact_debounce) {
      active_ = true;
      st_ = DfcState{};  // integral resets at activation
      prev_action_valid_ = false;
    }
  }

  if (!active_) {
    out.x_cmd = x_r;
    out.x_f_z = x_r.z;
    out.x_c_star_z = x_r.z;
    out.cost = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  DfcConfig cfg = params_.dfc;
  cfg.x_r = {x_r.x, x_r.y, x_r.z, 0.0, 0.0, 0.0};
  // on-environment convention: compression shows up negative on z
  Vec6 h_r{};
  Vec6 h_e{};
  h_r[2] = -f_r;
  h_e[2] = -ps.f_z;
  const DfcResult res = dfc_step(h_r, h_e, cfg, st_, dt);
  st_ = res.st;

  out.active = true;
  out.x_f_z = res.x_f[2];
  out.x_cmd = {res.x_f[0], res.x_f[1], res.x_f[2]};
  out.cost = std::numeric_limits<double>::quiet_NaN();

  if (kind_ == ControllerKind::kDfc) {
    out.x_c_star_z = res.x_f[2];
    st_.x_c_prev = res.x_f;
    return out;
  }

  if (!prev_action_valid_) {
    st_.x_c_prev = res.x_f;
    prev_action_valid_ = true;
  }
  nn::StateSample s;
  s.z = ps.x.z;
  s.z_dot = ps.x_dot.z;
  s.v = sim::tangential_speed(ps.x_dot);
  s.f_z = ps.f_z;
  VaicamChoice choice;
  if (model_ != nullptr) {
    choice = vaicam_select(res.x_f, s, f_r, st_, params_.vaicam, *model_, ws_);
  } else {
    // only reachable with rho == 0 (checked at construction)
    choice.x_c_z = res.x_f[2];
    choice.cost = std::numeric_limits<double>::quiet_NaN();
    choice.predicted_f_z = std::numeric_limits<double>::quiet_NaN();
  }
  st_.x_c_prev = res.x_f;
  st_.x_c_prev[2] = choice.x_c_z;
  out.x_c_star_z = choice.x_c_z;
  out.cost = choice.cost;
  out.x_cmd.z = choice.x_c_z;
  return out;
}

}  // namespace ftlab::ctl
