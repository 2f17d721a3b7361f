// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// The two evaluation protocols and their orchestration.
//
// Protocol A ("eval-ma"): train the static and dynamic model approximators
// on their corpora, execute the test grid (constant-velocity lines with
// randomized sine force references) under the base force controller, then
// replay every test rollout through both models in one-step-ahead prediction
// mode and compare force-prediction RMSE per velocity bin.
//
// Protocol B ("eval-control"): execute the same test grid under the base
// controller, the optimizer driven by the static model, and the optimizer
// driven by the dynamic model, comparing force-tracking RMSE per bin.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftlab/config.hpp"
#include "ftlab/data.hpp"
#include "ftlab/metrics.hpp"
#include "ftlab/model.hpp"

namespace ftlab::xp {

struct Corpus {
  std::vector<data::Rollout> sma_train, sma_val;
  std::vector<data::Rollout> dma_train, dma_val;
};

struct TrainedModels {
  nn::EnsembleModel sma, dma;
  nn::TrainReport sma_report, dma_report;
};

/// Deterministic corpus for one master seed: static-position rollouts with
/// randomized sine force references for the static model, sine-position
/// rollouts with stratified peak speeds for the dynamic model.
Corpus collect_corpus(const ExperimentConfig& cfg, std::uint64_t seed,
                      unsigned threads);

/// Seed stream for test-grid trajectory (velocity bin, trajectory index).
std::uint64_t test_seed(std::uint64_t master_seed, int bin, int traj);

/// Runs the full test grid under one controller. `model` may be null for
/// the base controller.
std::vector<data::Rollout> collect_test_grid(const ExperimentConfig& cfg,
                                             std::uint64_t seed,
                                             ctl::ControllerKind kind,
                                             const nn::EnsembleModel* model,
                                             unsigned threads);

TrainedModels train_models(const ExperimentConfig& cfg, std::uint64_t seed,
                           const Corpus& corpus, unsigned threads);

/// One-step-ahead force predictions over the metrics window of a recorded
/// rollout, next to the matching measured forces. With multi_step set, the
/// model rolls its own state forward and only the recorded actions are used.
struct PredictionSeries {
  std::vector<double> predicted;
  std::vector<double> measured;
};
PredictionSeries predict_forces(const nn::EnsembleModel& model,
                                const data::Rollout& rollout, bool multi_step);

struct Exp1Result {
  Table metrics;       // velocity, rmse_sma_mean/std, rmse_dma_mean/std, eta
  Table trajectories;  // velocity, trajectory, rmse_sma, rmse_dma
};

Exp1Result evaluate_ma(const ExperimentConfig& cfg,
                       const TrainedModels& models,
                       const std::vector<data::Rollout>& test_rollouts,
                       unsigned threads);

struct Exp2Result {
  Table metrics;  // velocity, rmse per controller (mean/std), eta pair
  Table trajectories;
  // populated only when cfg.save_rollouts and an output directory is in play
  std::vector<data::Rollout> oracle_rollouts, vaicam_rollouts;
};

Exp2Result evaluate_control(const ExperimentConfig& cfg, std::uint64_t seed,
                            const TrainedModels& models,
                            const std::vector<data::Rollout>& dfc_rollouts,
                            unsigned threads, bool keep_rollouts);

// ---------------------------------------------------------------------------
// Staged, file-backed pipeline (what the CLI subcommands call)

unsigned resolve_threads(const ExperimentConfig& cfg, bool single_thread);

std::string seed_dir(const std::string& out_dir, std::uint64_t seed);

void stage_collect(const ExperimentConfig& cfg, std::uint64_t seed,
                   const std::string& out_dir, unsigned threads);
void stage_train(const ExperimentConfig& cfg, std::uint64_t seed,
                 const std::string& out_dir, unsigned threads);
void stage_eval_ma(const ExperimentConfig& cfg, std::uint64_t seed,
                   const std::string& out_dir, unsigned threads);
void stage_eval_control(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::string& out_dir, unsigned threads);

/// Runs every stage for cfg.seeds consecutive master seeds, then writes
/// pooled per-bin summaries and the run manifest.
void reproduce(const ExperimentConfig& cfg, std::uint64_t master_seed,
               const std::string& out_dir, unsigned threads);

}  // namespace ftlab::xp
