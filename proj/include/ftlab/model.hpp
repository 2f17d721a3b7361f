// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Feedforward-network ensemble that learns the one-step state change of the
// force-tracking loop: delta_s = s[k+1] - s[k] as a function of (s[k], x_f).
// The state is (z, z_dot, f_z) in static mode and (z, z_dot, v, f_z) in
// dynamic mode; the two modes share all code, only the feature layout
// differs. Training is from scratch: explicit backprop, Adam, mini-batches,
// validation-plateau learning-rate halving.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftlab/common.hpp"

namespace ftlab::nn {

enum class StateMode { kStatic, kDynamic };

std::string to_string(StateMode mode);
StateMode state_mode_from_string(const std::string& s);

/// State vector width: 3 (static) or 4 (dynamic).
inline int state_dim(StateMode m) { return m == StateMode::kStatic ? 3 : 4; }
/// Network input width: state plus the commanded setpoint.
inline int input_dim(StateMode m) { return state_dim(m) + 1; }
/// Index of the force component within the state/delta layout.
inline int force_index(StateMode m) { return m == StateMode::kStatic ? 2 : 3; }

struct StateSample {
  double z = 0.0;      // m
  double z_dot = 0.0;  // m/s
  double v = 0.0;      // m/s, tangential speed (ignored in static mode)
  double f_z = 0.0;    // N
};

/// Raw feature vector [z, z_dot, (v,) f_z, x_f_z].
void featurize(const StateSample& s, double x_f_z, StateMode mode,
               double* out);

struct NetworkConfig {
  int n_estimators = 3;
  int hidden_layers = 3;
  int neurons_per_layer = 200;
  double learning_rate = 1e-3;
  int epochs = 50;
  std::string activation = "relu";
  std::string fusion = "average";
  std::string loss = "mse";
  int batch_size = 256;
  double plateau_factor = 0.5;
  int plateau_patience = 5;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Normalization

struct NormStats {
  std::vector<double> in_mean, in_std, out_mean, out_std;
};

/// (x - mean) / std elementwise. Throws DegenerateData on non-positive std.
std::vector<double> normalize(const std::vector<double>& x,
                              const std::vector<double>& mean,
                              const std::vector<double>& std_dev);
/// Exact inverse of normalize.
std::vector<double> denormalize(const std::vector<double>& x,
                                const std::vector<double>& mean,
                                const std::vector<double>& std_dev);

// ---------------------------------------------------------------------------
// Members

struct LayerShape {
  int in = 0;
  int out = 0;
  std::size_t w_off = 0;  // into Member::params, row-major [in x out]
  std::size_t b_off = 0;
};

struct Member {
  std::vector<LayerShape> layers;
  std::vector<double> params;
};

/// Allocates an all-zero member with hidden_layers x width topology.
Member make_member(int in_dim, int out_dim, int hidden_layers, int width);

/// Per-thread scratch for forward/backward passes.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] input, act[l] layer outputs
  std::vector<double> dz_a, dz_b;        // backward ping-pong
  std::vector<double> xnorm;             // normalized input batch
  std::vector<double> fused;             // ensemble-averaged outputs
  int rows = 0;
  std::vector<int> dims;

  void ensure(const std::vector<LayerShape>& layers, int batch_rows);
};

/// Forward pass over a normalized batch X [rows x in]; returns a pointer to
/// the output activations [rows x out] owned by the workspace.
const double* member_forward(const Member& member, const double* X, int rows,
                             Workspace& ws);

/// Batch-MSE gradients for one member. X and T are normalized; grads has the
/// layout of member.params. Returns the batch MSE (mean over rows * outputs).
double backprop(const Member& member, const double* X, const double* T,
                int rows, Workspace& ws, std::vector<double>& grads);

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update of `weights` in place; increments st.t.
void adam_step(std::vector<double>& weights, const std::vector<double>& grads,
               AdamState& st, double lr);

// ---------------------------------------------------------------------------
// Ensemble

struct EnsembleModel {
  StateMode state_mode = StateMode::kDynamic;
  NetworkConfig config;
  NormStats norm;
  std::vector<Member> members;
  bool trained = false;

  int in_dim() const { return input_dim(state_mode); }
  int out_dim() const { return state_dim(state_mode); }
};

/// Single-sample member evaluation: normalize, run the network, denormalize.
/// Returns the denormalized state delta.
std::vector<double> forward(const StateSample& s, double x_f_z,
                            const Member& member, const NormStats& norm,
                            StateMode mode);

/// Fused (ensemble-averaged) denormalized deltas for a raw feature batch
/// X [rows x in_dim]; writes rows x out_dim into `out`.
void predict_delta_batch(const EnsembleModel& model, const double* X, int rows,
                         Workspace& ws, double* out);

/// One-step prediction s_next = s + mean_member delta(s, x_c).
StateSample predict_next(const StateSample& s, double x_c_z,
                         const EnsembleModel& model, Workspace& ws);

// ---------------------------------------------------------------------------
// Training

/// Raw (un-normalized) supervised pairs.
struct TrainingSet {
  StateMode mode = StateMode::kDynamic;
  int count = 0;
  std::vector<double> X;  // count x input_dim(mode)
  std::vector<double> Y;  // count x state_dim(mode)
};

struct EpochRecord {
  double train_mse = 0.0;
  double val_mse = 0.0;
  double lr = 0.0;
};

struct TrainReport {
  std::vector<std::vector<EpochRecord>> member_epochs;
};

struct TrainResult {
  EnsembleModel model;
  TrainReport report;
};

/// Trains n_estimators members independently (seeded per member) on the
/// train split; normalization statistics come from the train split only.
/// `threads` > 1 trains members concurrently; results do not depend on it.
TrainResult train(const TrainingSet& train_set, const TrainingSet& val_set,
                  const NetworkConfig& cfg, std::uint64_t seed,
                  unsigned threads = 1);

// ---------------------------------------------------------------------------
// Persistence (versioned flat text format)

void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

}  // namespace ftlab::nn
