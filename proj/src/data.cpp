// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ftlab/rng.hpp"

namespace ftlab::data {

namespace {
constexpr std::uint64_t kPhaseStream = 0x50484153ull;  // reference phases
constexpr std::uint64_t kNoiseStream = 0x4e4f4953ull;  // force noise

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }
}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::kStaticPoint:
      return "static-point";
    case ProfileKind::kSineForce:
      return "sine-force";
    case ProfileKind::kSinePosition:
      return "sine-position";
    case ProfileKind::kLineConstantVelocity:
      return "line-constant-velocity";
  }
  return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "static-point") return ProfileKind::kStaticPoint;
  if (s == "sine-force") return ProfileKind::kSineForce;
  if (s == "sine-position") return ProfileKind::kSinePosition;
  if (s == "line-constant-velocity") return ProfileKind::kLineConstantVelocity;
  throw FormatError("unknown profile kind: '" + s + "'");
}

void ReferenceProfile::validate() const {
  if (kind == ProfileKind::kSineForce || kind == ProfileKind::kSinePosition) {
    if (!(force_frequency > 0.0))
      throw ConfigError("force sine frequency must be positive");
    if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  }
  if (kind == ProfileKind::kSinePosition && !(pos_frequency > 0.0))
    throw ConfigError("position sine frequency must be positive");
  if (kind == ProfileKind::kLineConstantVelocity) {
    if (!(length > 0.0)) throw ConfigError("line length must be positive");
    if (!(velocity > 0.0)) throw ConfigError("line velocity must be positive");
  }
}

ReferenceSeries gen_reference(const ReferenceProfile& profile,
                              const Timing& timing, std::uint64_t seed) {
  profile.validate();
  Rng rng(derive_seed(seed, kPhaseStream));
  const double force_phase = rng.uniform(0.0, 2.0 * M_PI);

  double motion = profile.duration;
  if (profile.kind == ProfileKind::kLineConstantVelocity)
    motion = std::min(profile.length / profile.velocity,
                      timing.line_duration_cap);

  ReferenceSeries s;
  s.dt = timing.dt;
  const double t_motion = timing.approach_duration + timing.settle_duration;
  s.motion_start = static_cast<std::size_t>(std::llround(t_motion / timing.dt));
  const std::size_t n =
      static_cast<std::size_t>(std::llround((t_motion + motion) / timing.dt)) +
      1;
  s.xr_x.resize(n);
  s.xr_y.resize(n);
  s.xr_z.resize(n);
  s.fr_z.resize(n);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * timing.dt;

    // z: smooth descent onto the surface, then hold the press depth
    if (t < timing.approach_duration) {
      const double u = t / timing.approach_duration;
      s.xr_z[k] = timing.start_height +
                  smoothstep(u) * (timing.press_depth - timing.start_height);
    } else {
      s.xr_z[k] = timing.press_depth;
    }

    const double tau = t - t_motion;
    double x = 0.0;
    if (tau > 0.0) {
      switch (profile.kind) {
        case ProfileKind::kStaticPoint:
        case ProfileKind::kSineForce:
          break;
        case ProfileKind::kSinePosition:
          x = profile.pos_amplitude *
              (1.0 - std::cos(2.0 * M_PI * profile.pos_frequency * tau));
          break;
        case ProfileKind::kLineConstantVelocity:
          x = profile.velocity * std::min(tau, motion);
          break;
      }
    }
    s.xr_x[k] = x;
    s.xr_y[k] = 0.0;

    if (profile.kind == ProfileKind::kStaticPoint) {
      s.fr_z[k] = profile.force_mean;
    } else {
      const double arg = tau > 0.0 ? 2.0 * M_PI * profile.force_frequency * tau +
                                         force_phase
                                   : force_phase;
      s.fr_z[k] = profile.force_mean + profile.force_amplitude * std::sin(arg);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Rollouts

Rollout collect_rollout(const ReferenceSeries& series, ctl::ControllerKind kind,
                        const ctl::ControllerParams& params,
                        const sim::ImpedanceGains& gains,
                        const sim::EnvironmentModel& env,
                        const nn::EnsembleModel* model,
                        const RolloutMeta& meta) {
  env.validate();
  gains.validate();

  Rollout r;
  r.meta = meta;
  r.meta.controller = ctl::to_string(kind);
  r.meta.dt = series.dt;
  r.meta.motion_start = series.motion_start;
  r.meta.activation_index = -1;
  const std::size_t n = series.size();
  r.t.reserve(n);
  r.z.reserve(n);
  r.z_dot.reserve(n);
  r.v.reserve(n);
  r.f_z.reserve(n);
  r.x_f_z.reserve(n);
  r.x_c_star_z.reserve(n);
  r.h_r_z.reserve(n);

  sim::PlantState plant;
  plant.x = {series.xr_x.front(), series.xr_y.front(), series.xr_z.front()};

  ctl::ForceController controller(kind, params, model);
  try {
    for (std::size_t k = 0; k < n; ++k) {
      const Vec3 x_r{series.xr_x[k], series.xr_y[k], series.xr_z[k]};
      const bool was_active = controller.active();
      const auto out = controller.step(plant, x_r, series.fr_z[k], series.dt);
      if (!was_active && controller.active())
        r.meta.activation_index = static_cast<long>(k);

      r.t.push_back(plant.t);
      r.z.push_back(plant.x.z);
      r.z_dot.push_back(plant.x_dot.z);
      r.v.push_back(sim::tangential_speed(plant.x_dot));
      r.f_z.push_back(plant.f_z);
      r.x_f_z.push_back(out.x_f_z);
      r.x_c_star_z.push_back(out.x_c_star_z);
      r.h_r_z.push_back(series.fr_z[k]);

      plant = sim::step(plant, out.x_cmd, series.dt, gains, env);
    }
  } catch (const IntegrationFault& e) {
    throw IntegrationFault(std::string(e.what()) + " (controller=" +
                           ctl::to_string(kind) + ", profile=" +
                           to_string(meta.profile) + ", seed=" +
                           std::to_string(meta.seed) + ", step=" +
                           std::to_string(r.t.size()) + ")");
  }
  return r;
}

namespace {
constexpr int kRolloutFormatVersion = 1;
constexpr int kDatasetFormatVersion = 1;

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// parses "key=value" tokens after a fixed prefix
std::string meta_value(const std::vector<std::string>& tokens,
                       const std::string& key) {
  for (const auto& t : tokens) {
    const auto pos = t.find('=');
    if (pos != std::string::npos && t.substr(0, pos) == key)
      return t.substr(pos + 1);
  }
  throw FormatError("missing header field '" + key + "'");
}
}  // namespace

void save_rollout(const Rollout& rollout, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for write: " + path);
  os << "# ftlab-rollout " << kRolloutFormatVersion
     << " controller=" << rollout.meta.controller
     << " profile=" << to_string(rollout.meta.profile)
     << " velocity=" << format_double(rollout.meta.velocity_tag)
     << " seed=" << rollout.meta.seed
     << " dt=" << format_double(rollout.meta.dt)
     << " motion_start=" << rollout.meta.motion_start
     << " activation=" << rollout.meta.activation_index << '\n';
  os << "t,z,z_dot,v,f_z,x_f_z,x_c_star_z,h_r_z\n";
  for (std::size_t k = 0; k < rollout.size(); ++k) {
    os << format_double(rollout.t[k]) << ',' << format_double(rollout.z[k])
       << ',' << format_double(rollout.z_dot[k]) << ','
       << format_double(rollout.v[k]) << ',' << format_double(rollout.f_z[k])
       << ',' << format_double(rollout.x_f_z[k]) << ','
       << format_double(rollout.x_c_star_z[k]) << ','
       << format_double(rollout.h_r_z[k]) << '\n';
  }
  if (!os) throw InputError("write failed: " + path);
}

Rollout load_rollout(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty rollout file");
  {
    std::istringstream ss(line);
    std::string hash, magic;
    int version = 0;
    ss >> hash >> magic >> version;
    if (hash != "#" || magic != "ftlab-rollout")
      throw FormatError("not a rollout file");
    if (version != kRolloutFormatVersion)
      throw FormatError("unsupported rollout format version");
  }
  Rollout r;
  {
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    r.meta.controller = meta_value(tokens, "controller");
    r.meta.profile = profile_kind_from_string(meta_value(tokens, "profile"));
    r.meta.velocity_tag = parse_double(meta_value(tokens, "velocity"));
    r.meta.seed = static_cast<std::uint64_t>(
        parse_long(meta_value(tokens, "seed")));
    r.meta.dt = parse_double(meta_value(tokens, "dt"));
    r.meta.motion_start = static_cast<std::size_t>(
        parse_long(meta_value(tokens, "motion_start")));
    r.meta.activation_index = parse_long(meta_value(tokens, "activation"));
  }
  if (!std::getline(is, line) || line != "t,z,z_dot,v,f_z,x_f_z,x_c_star_z,h_r_z")
    throw FormatError("bad rollout column header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 8) throw FormatError("bad rollout row");
    r.t.push_back(parse_double(f[0]));
    r.z.push_back(parse_double(f[1]));
    r.z_dot.push_back(parse_double(f[2]));
    r.v.push_back(parse_double(f[3]));
    r.f_z.push_back(parse_double(f[4]));
    r.x_f_z.push_back(parse_double(f[5]));
    r.x_c_star_z.push_back(parse_double(f[6]));
    r.h_r_z.push_back(parse_double(f[7]));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Datasets

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kValidation:
      return "validation";
    case SplitTag::kTest:
      return "test";
  }
  return "?";
}

SplitTag split_from_string(const std::string& s) {
  if (s == "train") return SplitTag::kTrain;
  if (s == "validation") return SplitTag::kValidation;
  if (s == "test") return SplitTag::kTest;
  throw FormatError("unknown split tag: '" + s + "'");
}

Dataset assemble_dataset(const std::vector<Rollout>& rollouts,
                         nn::StateMode mode, SplitTag split,
                         bool from_activation) {
  Dataset ds;
  ds.mode = mode;
  ds.split = split;
  if (rollouts.empty()) return ds;
  const double dt = rollouts.front().meta.dt;
  for (std::size_t ri = 0; ri < rollouts.size(); ++ri) {
    const Rollout& r = rollouts[ri];
    if (r.meta.dt != dt)
      throw ShapeError("rollouts with mixed dt cannot be assembled");
    std::size_t start = 0;
    if (from_activation) {
      if (r.meta.activation_index < 0) continue;
      start = static_cast<std::size_t>(r.meta.activation_index);
    }
    if (r.size() < 2) continue;
    for (std::size_t k = start; k + 1 < r.size(); ++k) {
      Tuple t;
      t.s.z = r.z[k];
      t.s.z_dot = r.z_dot[k];
      t.s.v = r.v[k];
      t.s.f_z = r.f_z[k];
      t.x_f_z = r.x_f_z[k];
      t.d_z = r.z[k + 1] - r.z[k];
      t.d_z_dot = r.z_dot[k + 1] - r.z_dot[k];
      t.d_v = r.v[k + 1] - r.v[k];
      t.d_f_z = r.f_z[k + 1] - r.f_z[k];
      t.rollout_id = static_cast<std::uint32_t>(ri);
      t.step = static_cast<std::uint32_t>(k);
      ds.tuples.push_back(t);
    }
  }
  return ds;
}

void add_force_noise(Dataset& dataset, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (sigma == 0.0) return;
  for (Tuple& t : dataset.tuples) {
    const std::uint64_t stream = derive_seed(seed, kNoiseStream, t.rollout_id);
    const double n_k = sigma * gaussian_at(seed, stream, t.step);
    const double n_k1 = sigma * gaussian_at(seed, stream, t.step + 1);
    t.s.f_z += n_k;
    t.d_f_z += n_k1 - n_k;
  }
}

nn::TrainingSet to_training_set(const Dataset& dataset) {
  nn::TrainingSet ts;
  ts.mode = dataset.mode;
  ts.count = static_cast<int>(dataset.tuples.size());
  const int idim = nn::input_dim(dataset.mode);
  const int odim = nn::state_dim(dataset.mode);
  ts.X.resize(static_cast<std::size_t>(ts.count) * idim);
  ts.Y.resize(static_cast<std::size_t>(ts.count) * odim);
  for (int i = 0; i < ts.count; ++i) {
    const Tuple& t = dataset.tuples[i];
    nn::featurize(t.s, t.x_f_z, dataset.mode,
                  ts.X.data() + static_cast<std::size_t>(i) * idim);
    double* y = ts.Y.data() + static_cast<std::size_t>(i) * odim;
    int c = 0;
    y[c++] = t.d_z;
    y[c++] = t.d_z_dot;
    if (dataset.mode == nn::StateMode::kDynamic) y[c++] = t.d_v;
    y[c++] = t.d_f_z;
  }
  return ts;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for write: " + path);
  const bool dyn = dataset.mode == nn::StateMode::kDynamic;
  os << "# ftlab-dataset " << kDatasetFormatVersion
     << " state_mode=" << nn::to_string(dataset.mode)
     << " split=" << to_string(dataset.split) << '\n';
  os << (dyn ? "z,z_dot,v,f_z,x_f_z,d_z,d_z_dot,d_v,d_f_z"
             : "z,z_dot,f_z,x_f_z,d_z,d_z_dot,d_f_z")
     << '\n';
  for (const Tuple& t : dataset.tuples) {
    os << format_double(t.s.z) << ',' << format_double(t.s.z_dot) << ',';
    if (dyn) os << format_double(t.s.v) << ',';
    os << format_double(t.s.f_z) << ',' << format_double(t.x_f_z) << ','
       << format_double(t.d_z) << ',' << format_double(t.d_z_dot) << ',';
    if (dyn) os << format_double(t.d_v) << ',';
    os << format_double(t.d_f_z) << '\n';
  }
  if (!os) throw InputError("write failed: " + path);
}

Dataset load_dataset(const std::string& path, nn::StateMode expected_mode) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty dataset file");
  Dataset ds;
  {
    std::istringstream ss(line);
    std::string hash, magic;
    int version = 0;
    ss >> hash >> magic >> version;
    if (hash != "#" || magic != "ftlab-dataset")
      throw FormatError("not a dataset file");
    if (version != kDatasetFormatVersion)
      throw FormatError("unsupported dataset format version");
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    ds.mode = nn::state_mode_from_string(meta_value(tokens, "state_mode"));
    ds.split = split_from_string(meta_value(tokens, "split"));
  }
  if (ds.mode != expected_mode)
    throw FormatError("dataset state mode does not match the requested mode");
  const bool dyn = ds.mode == nn::StateMode::kDynamic;
  if (!std::getline(is, line)) throw FormatError("missing dataset columns");
  const std::string want = dyn ? "z,z_dot,v,f_z,x_f_z,d_z,d_z_dot,d_v,d_f_z"
                               : "z,z_dot,f_z,x_f_z,d_z,d_z_dot,d_f_z";
  if (line != want) throw FormatError("bad dataset column header");
  const std::size_t width = dyn ? 9 : 7;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != width) throw FormatError("bad dataset row");
    Tuple t;
    std::size_t i = 0;
    t.s.z = parse_double(f[i++]);
    t.s.z_dot = parse_double(f[i++]);
    if (dyn) t.s.v = parse_double(f[i++]);
    t.s.f_z = parse_double(f[i++]);
    t.x_f_z = parse_double(f[i++]);
    t.d_z = parse_double(f[i++]);
    t.d_z_dot = parse_double(f[i++]);
    if (dyn) t.d_v = parse_double(f[i++]);
    t.d_f_z = parse_double(f[i++]);
    ds.tuples.push_back(t);
  }
  return ds;
}

}  // namespace ftlab::data
