// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference-trajectory generation, closed-loop rollout recording, dataset
// assembly, and the on-disk CSV formats.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftlab/common.hpp"
#include "ftlab/control.hpp"
#include "ftlab/model.hpp"
#include "ftlab/plant.hpp"

namespace ftlab::data {

enum class ProfileKind {
  kStaticPoint,
  kSineForce,
  kSinePosition,
  kLineConstantVelocity,
};

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& s);

struct ReferenceProfile {
  ProfileKind kind = ProfileKind::kSineForce;
  // force reference (all kinds)
  double force_amplitude = 0.0;  // N
  double force_frequency = 1.0;  // Hz
  double force_mean = 15.0;      // N
  // position reference
  double pos_amplitude = 0.0;    // m, sine-position
  double pos_frequency = 1.0;    // Hz, sine-position
  double velocity = 0.0;         // m/s, line kind
  double duration = 5.0;         // s, motion-phase length for non-line kinds
  double length = 1.2;           // m, line kind

  void validate() const;
};

/// Shared timing of every rollout: a smooth descent onto the surface, a
/// settle window, then the motion/force phase.
struct Timing {
  double dt = 1e-3;
  double approach_duration = 0.5;   // s
  double settle_duration = 1.0;     // s
  double start_height = 0.01;       // m above the surface
  double press_depth = -0.010;      // m, z setpoint while in contact
  double line_duration_cap = 12.0;  // s, cap on the constant-velocity phase
};

struct ReferenceSeries {
  double dt = 1e-3;
  std::size_t motion_start = 0;  // index where the motion/force phase begins
  std::vector<double> xr_x, xr_y, xr_z;  // position reference
  std::vector<double> fr_z;              // force reference (compression, N)
  std::size_t size() const { return fr_z.size(); }
};

/// Deterministic reference series at dt resolution. The seed fixes the force
/// sine phase. Force and position sines start, continuously, at the end of
/// the settle window.
ReferenceSeries gen_reference(const ReferenceProfile& profile,
                              const Timing& timing, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rollouts

struct RolloutMeta {
  std::string controller = "dfc";
  ProfileKind profile = ProfileKind::kSineForce;
  double velocity_tag = 0.0;  // commanded or peak tangential speed
  std::uint64_t seed = 0;
  double dt = 1e-3;
  std::size_t motion_start = 0;
  long activation_index = -1;  // first force-control step, -1 if never
};

struct Rollout {
  RolloutMeta meta;
  std::vector<double> t, z, z_dot, v, f_z, x_f_z, x_c_star_z, h_r_z;
  std::size_t size() const { return t.size(); }
};

/// Runs the closed loop over the reference series and records one sample per
/// control step (state at step k plus the action applied at step k).
Rollout collect_rollout(const ReferenceSeries& series, ctl::ControllerKind kind,
                        const ctl::ControllerParams& params,
                        const sim::ImpedanceGains& gains,
                        const sim::EnvironmentModel& env,
                        const nn::EnsembleModel* model,
                        const RolloutMeta& meta);

void save_rollout(const Rollout& rollout, const std::string& path);
Rollout load_rollout(const std::string& path);

// ---------------------------------------------------------------------------
// Datasets

enum class SplitTag { kTrain, kValidation, kTest };

std::string to_string(SplitTag tag);
SplitTag split_from_string(const std::string& s);

struct Tuple {
  nn::StateSample s;
  double x_f_z = 0.0;
  double d_z = 0.0, d_z_dot = 0.0, d_v = 0.0, d_f_z = 0.0;
  std::uint32_t rollout_id = 0;  // provenance, used by the noise injector
  std::uint32_t step = 0;
};

struct Dataset {
  nn::StateMode mode = nn::StateMode::kDynamic;
  SplitTag split = SplitTag::kTrain;
  std::vector<Tuple> tuples;
};

/// Emits per-step delta tuples (d = next - current, exactly as recorded).
/// Tuples never cross rollout boundaries; when from_activation is set, each
/// rollout contributes samples from its force-control activation onward.
Dataset assemble_dataset(const std::vector<Rollout>& rollouts,
                         nn::StateMode mode, SplitTag split,
                         bool from_activation = true);

/// Perturbs every f_z occurrence with seeded Gaussian draws addressed by
/// (rollout, step), so s.f_z and the force delta stay mutually consistent.
/// sigma = 0 leaves the dataset untouched.
void add_force_noise(Dataset& dataset, double sigma, std::uint64_t seed);

nn::TrainingSet to_training_set(const Dataset& dataset);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path, nn::StateMode expected_mode);

}  // namespace ftlab::data
