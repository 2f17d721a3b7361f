// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a flat key=value file with one section per
// module. Every control gain, network hyperparameter, and protocol constant
// has a named key; the built-in defaults are the values used throughout the
// experiments.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftlab/control.hpp"
#include "ftlab/data.hpp"
#include "ftlab/model.hpp"
#include "ftlab/plant.hpp"

namespace ftlab::xp {

struct ExperimentConfig {
  // plant
  double dt = 1e-3;
  double virtual_mass = 1.0;

  // impedance
  double stiffness_translational = 1700.0;
  double stiffness_rotational = 300.0;
  double damping_ratio = 1.0;

  sim::EnvironmentModel env;

  // force controller
  double k_p = 1e-6;
  double k_i = 2e-3;
  Vec6 gamma{0, 0, 1, 0, 0, 0};
  double integrator_limit = 5e4;
  double contact_threshold = 0.5;
  int contact_debounce = 5;

  // residual-action optimizer
  double alpha = 25.0;
  double beta = 200.0;
  double rho = 0.003;
  int candidates = 21;

  nn::NetworkConfig network;

  // corpus generation
  double noise_sigma = 0.1;
  int sma_rollouts = 10;
  int sma_train_rollouts = 9;
  int dma_train_rollouts = 20;
  int dma_val_rollouts = 11;
  double train_duration = 4.0;
  double val_duration = 3.0;
  double force_amp_min = 5.0, force_amp_max = 20.0;
  double force_mean_min = 10.0, force_mean_max = 25.0;
  double force_freq_min = 0.2, force_freq_max = 2.0;
  double pos_freq_min = 0.5, pos_freq_max = 1.2;
  double peak_speed_min = 0.05, peak_speed_max = 0.55;
  double approach_duration = 0.5;
  double settle_duration = 1.0;
  double start_height = 0.01;
  double press_depth = -0.010;

  // test protocol
  std::vector<double> velocity_grid{0.01, 0.05, 0.10, 0.15, 0.20, 0.25,
                                    0.30, 0.35, 0.40, 0.45, 0.50};
  int trajectories_per_velocity = 10;
  double line_length = 1.2;
  double line_duration_cap = 12.0;
  int seeds = 3;
  std::string prediction_mode = "one-step";  // or "multi-step"
  bool save_rollouts = true;

  // execution
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;

  sim::ImpedanceGains gains() const;
  data::Timing timing() const;
  ctl::ControllerParams controller_params() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
/// Canonical text form; parsing the dump reproduces the config.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace ftlab::xp
