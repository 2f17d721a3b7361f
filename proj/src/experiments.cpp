// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ftlab/kernels.hpp"
#include "ftlab/parallel.hpp"
#include "ftlab/rng.hpp"

namespace fs = std::filesystem;

namespace ftlab::xp {

namespace {

constexpr std::uint64_t kSmaStream = 0x534d41ull;
constexpr std::uint64_t kDmaTrainStream = 0x444d4154ull;
constexpr std::uint64_t kDmaValStream = 0x444d4156ull;
constexpr std::uint64_t kTestStream = 0x54455354ull;
constexpr std::uint64_t kTrainSmaStream = 0x545253ull;
constexpr std::uint64_t kTrainDmaStream = 0x545244ull;
constexpr std::uint64_t kNoiseSmaStream = 0x4e5353ull;
constexpr std::uint64_t kNoiseDmaStream = 0x4e5344ull;

data::ReferenceProfile random_force_sine(const ExperimentConfig& cfg,
                                         Rng& rng) {
  data::ReferenceProfile p;
  p.force_amplitude = rng.uniform(cfg.force_amp_min, cfg.force_amp_max);
  p.force_mean = rng.uniform(cfg.force_mean_min, cfg.force_mean_max);
  p.force_frequency = rng.uniform(cfg.force_freq_min, cfg.force_freq_max);
  return p;
}

struct RolloutSpec {
  data::ReferenceProfile profile;
  std::uint64_t seed = 0;
};

std::vector<data::Rollout> run_specs(const ExperimentConfig& cfg,
                                     const std::vector<RolloutSpec>& specs,
                                     ctl::ControllerKind kind,
                                     const nn::EnsembleModel* model,
                                     unsigned threads) {
  const auto gains = cfg.gains();
  const auto timing = cfg.timing();
  const auto params = cfg.controller_params();
  std::vector<data::Rollout> out(specs.size());
  parallel_for(specs.size(), threads, [&](std::size_t i) {
    const auto series = data::gen_reference(specs[i].profile, timing,
                                            specs[i].seed);
    data::RolloutMeta meta;
    meta.profile = specs[i].profile.kind;
    meta.seed = specs[i].seed;
    meta.velocity_tag = specs[i].profile.kind ==
                                data::ProfileKind::kLineConstantVelocity
                            ? specs[i].profile.velocity
                            : 2.0 * M_PI * specs[i].profile.pos_frequency *
                                  specs[i].profile.pos_amplitude;
    out[i] = data::collect_rollout(series, kind, params, gains, cfg.env,
                                   model, meta);
  });
  return out;
}

}  // namespace

Corpus collect_corpus(const ExperimentConfig& cfg, std::uint64_t seed,
                      unsigned threads) {
  std::vector<RolloutSpec> sma_specs;
  for (int i = 0; i < cfg.sma_rollouts; ++i) {
    const std::uint64_t s = derive_seed(seed, kSmaStream, i);
    Rng rng(s);
    RolloutSpec spec;
    spec.profile = random_force_sine(cfg, rng);
    spec.profile.kind = data::ProfileKind::kSineForce;
    spec.profile.duration = cfg.train_duration;
    spec.seed = s;
    sma_specs.push_back(spec);
  }

  std::vector<RolloutSpec> dma_train_specs;
  for (int i = 0; i < cfg.dma_train_rollouts; ++i) {
    const std::uint64_t s = derive_seed(seed, kDmaTrainStream, i);
    Rng rng(s);
    RolloutSpec spec;
    spec.profile = random_force_sine(cfg, rng);
    spec.profile.kind = data::ProfileKind::kSinePosition;
    spec.profile.duration = cfg.train_duration;
    // stratified peak speeds covering the velocity span without gaps
    const double span = cfg.peak_speed_max - cfg.peak_speed_min;
    const double u = rng.uniform();
    const double peak =
        cfg.peak_speed_min +
        span * (static_cast<double>(i) + u) / cfg.dma_train_rollouts;
    spec.profile.pos_frequency = rng.uniform(cfg.pos_freq_min, cfg.pos_freq_max);
    spec.profile.pos_amplitude = peak / (2.0 * M_PI * spec.profile.pos_frequency);
    spec.seed = s;
    dma_train_specs.push_back(spec);
  }

  std::vector<RolloutSpec> dma_val_specs;
  {
    // each validation rollout gets one of the grid velocities, in a
    // seed-shuffled order
    std::vector<std::size_t> order(cfg.velocity_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng perm_rng(derive_seed(seed, kDmaValStream, 0xffff));
    perm_rng.shuffle(order);
    for (int i = 0; i < cfg.dma_val_rollouts; ++i) {
      const std::uint64_t s = derive_seed(seed, kDmaValStream, i);
      Rng rng(s);
      RolloutSpec spec;
      spec.profile = random_force_sine(cfg, rng);
      spec.profile.kind = data::ProfileKind::kSinePosition;
      spec.profile.duration = cfg.val_duration;
      const double peak = cfg.velocity_grid[order[i % order.size()]];
      spec.profile.pos_frequency =
          rng.uniform(cfg.pos_freq_min, cfg.pos_freq_max);
      spec.profile.pos_amplitude =
          peak / (2.0 * M_PI * spec.profile.pos_frequency);
      spec.seed = s;
      dma_val_specs.push_back(spec);
    }
  }

  Corpus corpus;
  auto sma_all =
      run_specs(cfg, sma_specs, ctl::ControllerKind::kDfc, nullptr, threads);
  for (int i = 0; i < cfg.sma_rollouts; ++i) {
    if (i < cfg.sma_train_rollouts)
      corpus.sma_train.push_back(std::move(sma_all[i]));
    else
      corpus.sma_val.push_back(std::move(sma_all[i]));
  }
  corpus.dma_train = run_specs(cfg, dma_train_specs, ctl::ControllerKind::kDfc,
                               nullptr, threads);
  corpus.dma_val = run_specs(cfg, dma_val_specs, ctl::ControllerKind::kDfc,
                             nullptr, threads);
  return corpus;
}

std::uint64_t test_seed(std::uint64_t master_seed, int bin, int traj) {
  return derive_seed(master_seed, kTestStream, bin, traj);
}

std::vector<data::Rollout> collect_test_grid(const ExperimentConfig& cfg,
                                             std::uint64_t seed,
                                             ctl::ControllerKind kind,
                                             const nn::EnsembleModel* model,
                                             unsigned threads) {
  std::vector<RolloutSpec> specs;
  for (int b = 0; b < static_cast<int>(cfg.velocity_grid.size()); ++b)
    for (int t = 0; t < cfg.trajectories_per_velocity; ++t) {
      const std::uint64_t s = test_seed(seed, b, t);
      Rng rng(s);
      RolloutSpec spec;
      spec.profile = random_force_sine(cfg, rng);
      spec.profile.kind = data::ProfileKind::kLineConstantVelocity;
      spec.profile.velocity = cfg.velocity_grid[b];
      spec.profile.length = cfg.line_length;
      spec.seed = s;
      specs.push_back(spec);
    }
  return run_specs(cfg, specs, kind, model, threads);
}

TrainedModels train_models(const ExperimentConfig& cfg, std::uint64_t seed,
                           const Corpus& corpus, unsigned threads) {
  auto make_sets = [&](const std::vector<data::Rollout>& train_rollouts,
                       const std::vector<data::Rollout>& val_rollouts,
                       nn::StateMode mode, std::uint64_t noise_stream) {
    data::Dataset train_ds =
        data::assemble_dataset(train_rollouts, mode, data::SplitTag::kTrain);
    data::Dataset val_ds =
        data::assemble_dataset(val_rollouts, mode, data::SplitTag::kValidation);
    data::add_force_noise(train_ds, cfg.noise_sigma,
                          derive_seed(seed, noise_stream, 0));
    data::add_force_noise(val_ds, cfg.noise_sigma,
                          derive_seed(seed, noise_stream, 1));
    return std::pair{data::to_training_set(train_ds),
                     data::to_training_set(val_ds)};
  };

  TrainedModels out;
  {
    nn::NetworkConfig net = cfg.network;
    auto [tr, val] = make_sets(corpus.sma_train, corpus.sma_val,
                               nn::StateMode::kStatic, kNoiseSmaStream);
    auto res = nn::train(tr, val, net, derive_seed(seed, kTrainSmaStream, 0),
                         threads);
    out.sma = std::move(res.model);
    out.sma_report = std::move(res.report);
  }
  {
    nn::NetworkConfig net = cfg.network;
    auto [tr, val] = make_sets(corpus.dma_train, corpus.dma_val,
                               nn::StateMode::kDynamic, kNoiseDmaStream);
    auto res = nn::train(tr, val, net, derive_seed(seed, kTrainDmaStream, 0),
                         threads);
    out.dma = std::move(res.model);
    out.dma_report = std::move(res.report);
  }
  return out;
}

PredictionSeries predict_forces(const nn::EnsembleModel& model,
                                const data::Rollout& rollout,
                                bool multi_step) {
  PredictionSeries out;
  const std::size_t n = rollout.size();
  if (n < 2) return out;
  const std::size_t start = std::min(rollout.meta.motion_start, n - 2);
  const std::size_t count = n - 1 - start;
  out.predicted.resize(count);
  out.measured.resize(count);
  nn::Workspace ws;
  const int idim = model.in_dim();
  const int odim = model.out_dim();
  const int f_idx = nn::force_index(model.state_mode);

  if (!multi_step) {
    std::vector<double> X(count * idim);
    for (std::size_t k = 0; k < count; ++k) {
      nn::StateSample s{rollout.z[start + k], rollout.z_dot[start + k],
                        rollout.v[start + k], rollout.f_z[start + k]};
      nn::featurize(s, rollout.x_f_z[start + k], model.state_mode,
                    X.data() + k * idim);
    }
    std::vector<double> deltas(count * odim);
    nn::predict_delta_batch(model, X.data(), static_cast<int>(count), ws,
                            deltas.data());
    for (std::size_t k = 0; k < count; ++k) {
      out.predicted[k] = rollout.f_z[start + k] + deltas[k * odim + f_idx];
      out.measured[k] = rollout.f_z[start + k + 1];
    }
    return out;
  }

  nn::StateSample s{rollout.z[start], rollout.z_dot[start], rollout.v[start],
                    rollout.f_z[start]};
  for (std::size_t k = 0; k < count; ++k) {
    s = nn::predict_next(s, rollout.x_f_z[start + k], model, ws);
    if (model.state_mode == nn::StateMode::kStatic)
      s.v = rollout.v[start + k + 1];  // static mode does not model v
    out.predicted[k] = s.f_z;
    out.measured[k] = rollout.f_z[start + k + 1];
  }
  return out;
}

Exp1Result evaluate_ma(const ExperimentConfig& cfg,
                       const TrainedModels& models,
                       const std::vector<data::Rollout>& test_rollouts,
                       unsigned threads) {
  const bool multi = cfg.prediction_mode == "multi-step";
  const std::size_t n = test_rollouts.size();
  std::vector<double> rmse_sma(n), rmse_dma(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto ps = predict_forces(models.sma, test_rollouts[i], multi);
    rmse_sma[i] = rmse(ps.measured, ps.predicted);
    const auto pd = predict_forces(models.dma, test_rollouts[i], multi);
    rmse_dma[i] = rmse(pd.measured, pd.predicted);
  });

  Exp1Result res;
  res.trajectories.columns = {"velocity", "trajectory", "rmse_sma",
                              "rmse_dma"};
  res.metrics.columns = {"velocity",      "rmse_sma_mean", "rmse_sma_std",
                         "rmse_dma_mean", "rmse_dma_std",  "eta"};
  const int per_bin = cfg.trajectories_per_velocity;
  for (int b = 0; b < static_cast<int>(cfg.velocity_grid.size()); ++b) {
    std::vector<double> s_bin, d_bin;
    for (int t = 0; t < per_bin; ++t) {
      const std::size_t i = static_cast<std::size_t>(b) * per_bin + t;
      s_bin.push_back(rmse_sma[i]);
      d_bin.push_back(rmse_dma[i]);
      res.trajectories.rows.push_back({cfg.velocity_grid[b],
                                       static_cast<double>(t), rmse_sma[i],
                                       rmse_dma[i]});
    }
    const double sm = mean(s_bin);
    const double dm = mean(d_bin);
    res.metrics.rows.push_back({cfg.velocity_grid[b], sm, sample_std(s_bin),
                                dm, sample_std(d_bin), sm / dm});
  }
  return res;
}

Exp2Result evaluate_control(const ExperimentConfig& cfg, std::uint64_t seed,
                            const TrainedModels& models,
                            const std::vector<data::Rollout>& dfc_rollouts,
                            unsigned threads, bool keep_rollouts) {
  const std::size_t n = dfc_rollouts.size();
  std::vector<double> rmse_dfc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = dfc_rollouts[i];
    const std::size_t start = std::min(r.meta.motion_start, r.size() - 1);
    std::vector<double> ref(r.h_r_z.begin() + start, r.h_r_z.end());
    std::vector<double> act(r.f_z.begin() + start, r.f_z.end());
    rmse_dfc[i] = rmse(ref, act);
  }

  auto run_opt = [&](ctl::ControllerKind kind, const nn::EnsembleModel& model,
                     std::vector<double>& out_rmse,
                     std::vector<data::Rollout>& keep) {
    out_rmse.resize(n);
    if (keep_rollouts) keep.resize(n);
    std::vector<RolloutSpec> specs;
    const int per_bin = cfg.trajectories_per_velocity;
    for (int b = 0; b < static_cast<int>(cfg.velocity_grid.size()); ++b)
      for (int t = 0; t < per_bin; ++t) {
        const std::uint64_t s = test_seed(seed, b, t);
        Rng rng(s);
        RolloutSpec spec;
        spec.profile = random_force_sine(cfg, rng);
        spec.profile.kind = data::ProfileKind::kLineConstantVelocity;
        spec.profile.velocity = cfg.velocity_grid[b];
        spec.profile.length = cfg.line_length;
        spec.seed = s;
        specs.push_back(spec);
      }
    const auto gains = cfg.gains();
    const auto timing = cfg.timing();
    const auto params = cfg.controller_params();
    parallel_for(n, threads, [&](std::size_t i) {
      const auto series =
          data::gen_reference(specs[i].profile, timing, specs[i].seed);
      data::RolloutMeta meta;
      meta.profile = specs[i].profile.kind;
      meta.seed = specs[i].seed;
      meta.velocity_tag = specs[i].profile.velocity;
      data::Rollout r = data::collect_rollout(series, kind, params, gains,
                                              cfg.env, &model, meta);
      const std::size_t start = std::min(r.meta.motion_start, r.size() - 1);
      std::vector<double> ref(r.h_r_z.begin() + start, r.h_r_z.end());
      std::vector<double> act(r.f_z.begin() + start, r.f_z.end());
      out_rmse[i] = rmse(ref, act);
      if (keep_rollouts) keep[i] = std::move(r);
    });
  };

  Exp2Result res;
  std::vector<double> rmse_oracle, rmse_vaicam;
  run_opt(ctl::ControllerKind::kOracle, models.sma, rmse_oracle,
          res.oracle_rollouts);
  run_opt(ctl::ControllerKind::kVaicam, models.dma, rmse_vaicam,
          res.vaicam_rollouts);

  res.trajectories.columns = {"velocity",    "trajectory",  "rmse_dfc",
                              "rmse_oracle", "rmse_vaicam"};
  res.metrics.columns = {"velocity",         "rmse_dfc_mean",
                         "rmse_dfc_std",     "rmse_oracle_mean",
                         "rmse_oracle_std",  "rmse_vaicam_mean",
                         "rmse_vaicam_std",  "eta_vs_dfc",
                         "eta_vs_oracle"};
  const int per_bin = cfg.trajectories_per_velocity;
  for (int b = 0; b < static_cast<int>(cfg.velocity_grid.size()); ++b) {
    std::vector<double> fb, ob, vb;
    for (int t = 0; t < per_bin; ++t) {
      const std::size_t i = static_cast<std::size_t>(b) * per_bin + t;
      fb.push_back(rmse_dfc[i]);
      ob.push_back(rmse_oracle[i]);
      vb.push_back(rmse_vaicam[i]);
      res.trajectories.rows.push_back({cfg.velocity_grid[b],
                                       static_cast<double>(t), rmse_dfc[i],
                                       rmse_oracle[i], rmse_vaicam[i]});
    }
    const double fm = mean(fb);
    const double om = mean(ob);
    const double vm = mean(vb);
    res.metrics.rows.push_back({cfg.velocity_grid[b], fm, sample_std(fb), om,
                                sample_std(ob), vm, sample_std(vb), fm / vm,
                                om / vm});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Staged pipeline

unsigned resolve_threads(const ExperimentConfig& cfg, bool single_thread) {
  if (single_thread) return 1;
  if (cfg.threads != 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::string seed_dir(const std::string& out_dir, std::uint64_t seed) {
  return out_dir + "/seed_" + std::to_string(seed);
}

namespace {

void save_rollout_group(const std::vector<data::Rollout>& rollouts,
                        const std::string& dir, const std::string& stem) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%03zu.csv", stem.c_str(), i);
    data::save_rollout(rollouts[i], dir + "/" + name);
  }
}

std::vector<data::Rollout> load_rollout_group(const std::string& dir,
                                              const std::string& stem,
                                              std::size_t count) {
  std::vector<data::Rollout> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%03zu.csv", stem.c_str(), i);
    out.push_back(data::load_rollout(dir + "/" + name));
  }
  return out;
}

Table training_log_table(const TrainedModels& models) {
  Table t;
  t.columns = {"model", "member", "epoch", "train_mse", "val_mse", "lr"};
  const auto add = [&](double model_id, const nn::TrainReport& rep) {
    for (std::size_t m = 0; m < rep.member_epochs.size(); ++m)
      for (std::size_t e = 0; e < rep.member_epochs[m].size(); ++e) {
        const auto& rec = rep.member_epochs[m][e];
        t.rows.push_back({model_id, static_cast<double>(m),
                          static_cast<double>(e), rec.train_mse, rec.val_mse,
                          rec.lr});
      }
  };
  add(0.0, models.sma_report);
  add(1.0, models.dma_report);
  return t;
}

}  // namespace

void stage_collect(const ExperimentConfig& cfg, std::uint64_t seed,
                   const std::string& out_dir, unsigned threads) {
  const std::string dir = seed_dir(out_dir, seed) + "/rollouts";
  const Corpus corpus = collect_corpus(cfg, seed, threads);
  save_rollout_group(corpus.sma_train, dir, "sma_train");
  save_rollout_group(corpus.sma_val, dir, "sma_val");
  save_rollout_group(corpus.dma_train, dir, "dma_train");
  save_rollout_group(corpus.dma_val, dir, "dma_val");
  const auto test = collect_test_grid(cfg, seed, ctl::ControllerKind::kDfc,
                                      nullptr, threads);
  save_rollout_group(test, dir, "test_dfc");
}

namespace {

Corpus load_corpus(const ExperimentConfig& cfg, const std::string& dir) {
  Corpus corpus;
  corpus.sma_train = load_rollout_group(dir, "sma_train",
                                        cfg.sma_train_rollouts);
  corpus.sma_val = load_rollout_group(
      dir, "sma_val", cfg.sma_rollouts - cfg.sma_train_rollouts);
  corpus.dma_train = load_rollout_group(dir, "dma_train",
                                        cfg.dma_train_rollouts);
  corpus.dma_val = load_rollout_group(dir, "dma_val", cfg.dma_val_rollouts);
  return corpus;
}

}  // namespace

void stage_train(const ExperimentConfig& cfg, std::uint64_t seed,
                 const std::string& out_dir, unsigned threads) {
  const std::string base = seed_dir(out_dir, seed);
  const Corpus corpus = load_corpus(cfg, base + "/rollouts");
  const TrainedModels models = train_models(cfg, seed, corpus, threads);
  fs::create_directories(base + "/models");
  nn::save_model(models.sma, base + "/models/sma.txt");
  nn::save_model(models.dma, base + "/models/dma.txt");
  write_table_csv(training_log_table(models), base + "/training_log.csv");
  if (cfg.save_rollouts) {
    fs::create_directories(base + "/datasets");
    auto dump = [&](const std::vector<data::Rollout>& rollouts,
                    nn::StateMode mode, data::SplitTag split,
                    const std::string& name) {
      data::Dataset ds = data::assemble_dataset(rollouts, mode, split);
      data::save_dataset(ds, base + "/datasets/" + name);
    };
    dump(corpus.sma_train, nn::StateMode::kStatic, data::SplitTag::kTrain,
         "sma_train.csv");
    dump(corpus.sma_val, nn::StateMode::kStatic, data::SplitTag::kValidation,
         "sma_validation.csv");
    dump(corpus.dma_train, nn::StateMode::kDynamic, data::SplitTag::kTrain,
         "dma_train.csv");
    dump(corpus.dma_val, nn::StateMode::kDynamic, data::SplitTag::kValidation,
         "dma_validation.csv");
  }
}

void stage_eval_ma(const ExperimentConfig& cfg, std::uint64_t seed,
                   const std::string& out_dir, unsigned threads) {
  const std::string base = seed_dir(out_dir, seed);
  TrainedModels models;
  models.sma = nn::load_model(base + "/models/sma.txt");
  models.dma = nn::load_model(base + "/models/dma.txt");
  const std::size_t n_test = cfg.velocity_grid.size() *
                             static_cast<std::size_t>(cfg.trajectories_per_velocity);
  const auto test = load_rollout_group(base + "/rollouts", "test_dfc", n_test);
  const Exp1Result res = evaluate_ma(cfg, models, test, threads);
  report(res.metrics, base + "/metrics_ma");
  write_table_csv(res.trajectories, base + "/metrics_ma_trajectories.csv");
}

void stage_eval_control(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::string& out_dir, unsigned threads) {
  const std::string base = seed_dir(out_dir, seed);
  TrainedModels models;
  models.sma = nn::load_model(base + "/models/sma.txt");
  models.dma = nn::load_model(base + "/models/dma.txt");
  const std::size_t n_test = cfg.velocity_grid.size() *
                             static_cast<std::size_t>(cfg.trajectories_per_velocity);
  const auto dfc = load_rollout_group(base + "/rollouts", "test_dfc", n_test);
  Exp2Result res = evaluate_control(cfg, seed, models, dfc, threads,
                                    cfg.save_rollouts);
  report(res.metrics, base + "/metrics_control");
  write_table_csv(res.trajectories, base + "/metrics_control_trajectories.csv");
  if (cfg.save_rollouts) {
    save_rollout_group(res.oracle_rollouts, base + "/rollouts", "test_oracle");
    save_rollout_group(res.vaicam_rollouts, base + "/rollouts", "test_vaicam");
  }
}

void reproduce(const ExperimentConfig& cfg, std::uint64_t master_seed,
               const std::string& out_dir, unsigned threads) {
  fs::create_directories(out_dir);
  std::vector<Table> ma_traj, ctl_traj;
  for (int si = 0; si < cfg.seeds; ++si) {
    const std::uint64_t seed = master_seed + static_cast<std::uint64_t>(si);
    stage_collect(cfg, seed, out_dir, threads);
    stage_train(cfg, seed, out_dir, threads);
    stage_eval_ma(cfg, seed, out_dir, threads);
    stage_eval_control(cfg, seed, out_dir, threads);
    const std::string base = seed_dir(out_dir, seed);
    ma_traj.push_back(read_table_csv(base + "/metrics_ma_trajectories.csv"));
    ctl_traj.push_back(
        read_table_csv(base + "/metrics_control_trajectories.csv"));
  }

  // pooled per-bin summaries across seeds
  Table summary_ma;
  summary_ma.columns = {"velocity",      "rmse_sma_mean", "rmse_sma_std",
                        "rmse_dma_mean", "rmse_dma_std",  "eta"};
  Table summary_ctl;
  summary_ctl.columns = {"velocity",         "rmse_dfc_mean",
                         "rmse_dfc_std",     "rmse_oracle_mean",
                         "rmse_oracle_std",  "rmse_vaicam_mean",
                         "rmse_vaicam_std",  "eta_vs_dfc",
                         "eta_vs_oracle"};
  for (std::size_t b = 0; b < cfg.velocity_grid.size(); ++b) {
    const double v = cfg.velocity_grid[b];
    std::vector<double> sma, dma;
    for (const Table& t : ma_traj)
      for (const auto& row : t.rows)
        if (row[0] == v) {
          sma.push_back(row[2]);
          dma.push_back(row[3]);
        }
    const double sm = mean(sma), dm = mean(dma);
    summary_ma.rows.push_back(
        {v, sm, sample_std(sma), dm, sample_std(dma), sm / dm});

    std::vector<double> fb, ob, vb;
    for (const Table& t : ctl_traj)
      for (const auto& row : t.rows)
        if (row[0] == v) {
          fb.push_back(row[2]);
          ob.push_back(row[3]);
          vb.push_back(row[4]);
        }
    const double fm = mean(fb), om = mean(ob), vm = mean(vb);
    summary_ctl.rows.push_back({v, fm, sample_std(fb), om, sample_std(ob), vm,
                                sample_std(vb), fm / vm, om / vm});
  }
  report(summary_ma, out_dir + "/summary_ma");
  report(summary_ctl, out_dir + "/summary_control");

  // manifest + resolved configuration
  const std::string cfg_text = dump_config(cfg);
  {
    std::ofstream os(out_dir + "/config.cfg");
    os << cfg_text;
  }
  {
    std::ofstream os(out_dir + "/manifest.txt");
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg_text)));
    os << "ftlab-run 1\n";
    os << "config_hash " << hash << '\n';
    os << "master_seed " << master_seed << '\n';
    os << "seeds " << cfg.seeds << '\n';
    os << "threads " << threads << '\n';
    os << "kernels " << kern::active().name << '\n';
    os << "rollout_format 1\ndataset_format 1\nmodel_format 1\n";
  }
}

}  // namespace ftlab::xp
