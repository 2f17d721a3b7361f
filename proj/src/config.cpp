// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ftlab::xp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::string cur;
  std::istringstream ss(v);
  while (std::getline(ss, cur, ',')) out.push_back(parse_double(trim(cur)));
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

Vec6 parse_vec6(const std::string& v) {
  const auto list = parse_list(v);
  if (list.size() != 6) throw FormatError("expected 6 comma-separated values");
  Vec6 out;
  std::copy(list.begin(), list.end(), out.begin());
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  env.validate();
  gains().validate();
  controller_params().dfc.validate();
  controller_params().vaicam.validate();
  network.validate();
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (sma_rollouts < 2 || sma_train_rollouts < 1 ||
      sma_train_rollouts >= sma_rollouts)
    throw ConfigError("invalid SMA corpus split");
  if (dma_train_rollouts < 1 || dma_val_rollouts < 1)
    throw ConfigError("invalid DMA corpus sizes");
  if (!(train_duration > 0.0) || !(val_duration > 0.0))
    throw ConfigError("corpus durations must be positive");
  if (velocity_grid.empty()) throw ConfigError("empty velocity grid");
  double prev = 0.0;
  for (double v : velocity_grid) {
    if (!(v > prev) || v > 1.0)
      throw ConfigError("velocity grid must be strictly increasing in (0, 1]");
    prev = v;
  }
  if (trajectories_per_velocity < 1)
    throw ConfigError("need at least one trajectory per velocity");
  if (!(line_length > 0.0) || !(line_duration_cap > 0.0))
    throw ConfigError("invalid line trajectory settings");
  if (seeds < 1) throw ConfigError("need at least one seed");
  if (prediction_mode != "one-step" && prediction_mode != "multi-step")
    throw ConfigError("prediction_mode must be one-step or multi-step");
  if (!(start_height > env.z_surface))
    throw ConfigError("start height must be above the surface");
  if (!(press_depth < env.z_surface))
    throw ConfigError("press depth must be below the surface");
}

sim::ImpedanceGains ExperimentConfig::gains() const {
  return sim::make_gains(stiffness_translational, stiffness_rotational,
                         damping_ratio, virtual_mass);
}

data::Timing ExperimentConfig::timing() const {
  data::Timing t;
  t.dt = dt;
  t.approach_duration = approach_duration;
  t.settle_duration = settle_duration;
  t.start_height = start_height;
  t.press_depth = press_depth;
  t.line_duration_cap = line_duration_cap;
  return t;
}

ctl::ControllerParams ExperimentConfig::controller_params() const {
  ctl::ControllerParams p;
  p.dfc.K_P = k_p;
  p.dfc.K_I = k_i;
  p.dfc.gamma = gamma;
  p.dfc.integrator_limit = integrator_limit;
  p.contact_threshold = contact_threshold;
  p.contact_debounce = contact_debounce;
  p.vaicam.rho = rho;
  p.vaicam.n_candidates = candidates;
  for (int i = 0; i < 6; ++i) {
    p.vaicam.alpha[i] = gamma[i] != 0.0 ? alpha : 0.0;
    p.vaicam.beta[i] = gamma[i] != 0.0 ? beta : 0.0;
  }
  return p;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

namespace {

using KvMap = std::map<std::string, std::string>;

KvMap parse_kv(std::istream& is) {
  KvMap kv;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw FormatError("bad section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("expected key=value at line " + std::to_string(lineno));
    const std::string key = section + "." + trim(line.substr(0, eq));
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

class Reader {
 public:
  explicit Reader(KvMap kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& def) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    used_.insert(key);
    return it->second;
  }
  double num(const std::string& key, double def) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    used_.insert(key);
    return parse_double(it->second);
  }
  long integer(const std::string& key, long def) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    used_.insert(key);
    return parse_long(it->second);
  }
  bool boolean(const std::string& key, bool def) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    used_.insert(key);
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw FormatError("expected true/false for " + key);
  }

  void check_all_used() const {
    for (const auto& [key, value] : kv_)
      if (used_.count(key) == 0)
        throw FormatError("unknown config key: " + key);
  }

 private:
  KvMap kv_;
  std::set<std::string> used_;
};

ExperimentConfig from_reader(Reader& r) {
  ExperimentConfig c;
  c.dt = r.num("plant.dt", c.dt);
  c.virtual_mass = r.num("plant.virtual_mass", c.virtual_mass);

  c.stiffness_translational =
      r.num("impedance.stiffness_translational", c.stiffness_translational);
  c.stiffness_rotational =
      r.num("impedance.stiffness_rotational", c.stiffness_rotational);
  c.damping_ratio = r.num("impedance.damping_ratio", c.damping_ratio);

  c.env.z_surface = r.num("environment.surface_height", c.env.z_surface);
  c.env.k_e = r.num("environment.contact_stiffness", c.env.k_e);
  c.env.d_e = r.num("environment.contact_damping", c.env.d_e);
  c.env.c_v = r.num("environment.velocity_coupling", c.env.c_v);
  c.env.mu = r.num("environment.friction_mu", c.env.mu);

  c.k_p = r.num("dfc.k_p", c.k_p);
  c.k_i = r.num("dfc.k_i", c.k_i);
  if (r.has("dfc.gamma")) c.gamma = parse_vec6(r.str("dfc.gamma", ""));
  c.integrator_limit = r.num("dfc.integrator_limit", c.integrator_limit);
  c.contact_threshold = r.num("dfc.contact_threshold", c.contact_threshold);
  c.contact_debounce =
      static_cast<int>(r.integer("dfc.contact_debounce", c.contact_debounce));

  c.alpha = r.num("vaicam.alpha", c.alpha);
  c.beta = r.num("vaicam.beta", c.beta);
  c.rho = r.num("vaicam.rho", c.rho);
  c.candidates = static_cast<int>(r.integer("vaicam.candidates", c.candidates));

  c.network.n_estimators =
      static_cast<int>(r.integer("network.estimators", c.network.n_estimators));
  c.network.hidden_layers = static_cast<int>(
      r.integer("network.hidden_layers", c.network.hidden_layers));
  c.network.neurons_per_layer = static_cast<int>(
      r.integer("network.neurons", c.network.neurons_per_layer));
  c.network.learning_rate =
      r.num("network.learning_rate", c.network.learning_rate);
  c.network.epochs =
      static_cast<int>(r.integer("network.epochs", c.network.epochs));
  c.network.activation = r.str("network.activation", c.network.activation);
  c.network.fusion = r.str("network.fusion", c.network.fusion);
  c.network.loss = r.str("network.loss", c.network.loss);
  c.network.batch_size =
      static_cast<int>(r.integer("network.batch_size", c.network.batch_size));

  c.noise_sigma = r.num("data.noise_sigma", c.noise_sigma);
  c.sma_rollouts =
      static_cast<int>(r.integer("data.sma_rollouts", c.sma_rollouts));
  c.sma_train_rollouts = static_cast<int>(
      r.integer("data.sma_train_rollouts", c.sma_train_rollouts));
  c.dma_train_rollouts = static_cast<int>(
      r.integer("data.dma_train_rollouts", c.dma_train_rollouts));
  c.dma_val_rollouts = static_cast<int>(
      r.integer("data.dma_val_rollouts", c.dma_val_rollouts));
  c.train_duration = r.num("data.train_duration", c.train_duration);
  c.val_duration = r.num("data.val_duration", c.val_duration);
  c.force_amp_min = r.num("data.force_amp_min", c.force_amp_min);
  c.force_amp_max = r.num("data.force_amp_max", c.force_amp_max);
  c.force_mean_min = r.num("data.force_mean_min", c.force_mean_min);
  c.force_mean_max = r.num("data.force_mean_max", c.force_mean_max);
  c.force_freq_min = r.num("data.force_freq_min", c.force_freq_min);
  c.force_freq_max = r.num("data.force_freq_max", c.force_freq_max);
  c.pos_freq_min = r.num("data.pos_freq_min", c.pos_freq_min);
  c.pos_freq_max = r.num("data.pos_freq_max", c.pos_freq_max);
  c.peak_speed_min = r.num("data.peak_speed_min", c.peak_speed_min);
  c.peak_speed_max = r.num("data.peak_speed_max", c.peak_speed_max);
  c.approach_duration = r.num("data.approach_duration", c.approach_duration);
  c.settle_duration = r.num("data.settle_duration", c.settle_duration);
  c.start_height = r.num("data.start_height", c.start_height);
  c.press_depth = r.num("data.press_depth", c.press_depth);

  if (r.has("experiment.velocity_grid"))
    c.velocity_grid = parse_list(r.str("experiment.velocity_grid", ""));
  c.trajectories_per_velocity = static_cast<int>(r.integer(
      "experiment.trajectories_per_velocity", c.trajectories_per_velocity));
  c.line_length = r.num("experiment.line_length", c.line_length);
  c.line_duration_cap =
      r.num("experiment.line_duration_cap", c.line_duration_cap);
  c.seeds = static_cast<int>(r.integer("experiment.seeds", c.seeds));
  c.prediction_mode = r.str("experiment.prediction_mode", c.prediction_mode);
  c.save_rollouts = r.boolean("experiment.save_rollouts", c.save_rollouts);
  c.threads =
      static_cast<unsigned>(r.integer("experiment.threads", c.threads));

  r.check_all_used();
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config: " + path);
  Reader r(parse_kv(is));
  return from_reader(r);
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[plant]\n";
  os << "dt = " << format_double(c.dt) << '\n';
  os << "virtual_mass = " << format_double(c.virtual_mass) << '\n';
  os << "\n[impedance]\n";
  os << "stiffness_translational = " << format_double(c.stiffness_translational)
     << '\n';
  os << "stiffness_rotational = " << format_double(c.stiffness_rotational)
     << '\n';
  os << "damping_ratio = " << format_double(c.damping_ratio) << '\n';
  os << "\n[environment]\n";
  os << "surface_height = " << format_double(c.env.z_surface) << '\n';
  os << "contact_stiffness = " << format_double(c.env.k_e) << '\n';
  os << "contact_damping = " << format_double(c.env.d_e) << '\n';
  os << "velocity_coupling = " << format_double(c.env.c_v) << '\n';
  os << "friction_mu = " << format_double(c.env.mu) << '\n';
  os << "\n[dfc]\n";
  os << "k_p = " << format_double(c.k_p) << '\n';
  os << "k_i = " << format_double(c.k_i) << '\n';
  os << "gamma = " << format_list({c.gamma.begin(), c.gamma.end()}) << '\n';
  os << "integrator_limit = " << format_double(c.integrator_limit) << '\n';
  os << "contact_threshold = " << format_double(c.contact_threshold) << '\n';
  os << "contact_debounce = " << c.contact_debounce << '\n';
  os << "\n[vaicam]\n";
  os << "alpha = " << format_double(c.alpha) << '\n';
  os << "beta = " << format_double(c.beta) << '\n';
  os << "rho = " << format_double(c.rho) << '\n';
  os << "candidates = " << c.candidates << '\n';
  os << "\n[network]\n";
  os << "estimators = " << c.network.n_estimators << '\n';
  os << "hidden_layers = " << c.network.hidden_layers << '\n';
  os << "neurons = " << c.network.neurons_per_layer << '\n';
  os << "learning_rate = " << format_double(c.network.learning_rate) << '\n';
  os << "epochs = " << c.network.epochs << '\n';
  os << "activation = " << c.network.activation << '\n';
  os << "fusion = " << c.network.fusion << '\n';
  os << "loss = " << c.network.loss << '\n';
  os << "batch_size = " << c.network.batch_size << '\n';
  os << "\n[data]\n";
  os << "noise_sigma = " << format_double(c.noise_sigma) << '\n';
  os << "sma_rollouts = " << c.sma_rollouts << '\n';
  os << "sma_train_rollouts = " << c.sma_train_rollouts << '\n';
  os << "dma_train_rollouts = " << c.dma_train_rollouts << '\n';
  os << "dma_val_rollouts = " << c.dma_val_rollouts << '\n';
  os << "train_duration = " << format_double(c.train_duration) << '\n';
  os << "val_duration = " << format_double(c.val_duration) << '\n';
  os << "force_amp_min = " << format_double(c.force_amp_min) << '\n';
  os << "force_amp_max = " << format_double(c.force_amp_max) << '\n';
  os << "force_mean_min = " << format_double(c.force_mean_min) << '\n';
  os << "force_mean_max = " << format_double(c.force_mean_max) << '\n';
  os << "force_freq_min = " << format_double(c.force_freq_min) << '\n';
  os << "force_freq_max = " << format_double(c.force_freq_max) << '\n';
  os << "pos_freq_min = " << format_double(c.pos_freq_min) << '\n';
  os << "pos_freq_max = " << format_double(c.pos_freq_max) << '\n';
  os << "peak_speed_min = " << format_double(c.peak_speed_min) << '\n';
  os << "peak_speed_max = " << format_double(c.peak_speed_max) << '\n';
  os << "approach_duration = " << format_double(c.approach_duration) << '\n';
  os << "settle_duration = " << format_double(c.settle_duration) << '\n';
  os << "start_height = " << format_double(c.start_height) << '\n';
  os << "press_depth = " << format_double(c.press_depth) << '\n';
  os << "\n[experiment]\n";
  os << "velocity_grid = " << format_list(c.velocity_grid) << '\n';
  os << "trajectories_per_velocity = " << c.trajectories_per_velocity << '\n';
  os << "line_length = " << format_double(c.line_length) << '\n';
  os << "line_duration_cap = " << format_double(c.line_duration_cap) << '\n';
  os << "seeds = " << c.seeds << '\n';
  os << "prediction_mode = " << c.prediction_mode << '\n';
  os << "save_rollouts = " << (c.save_rollouts ? "true" : "false") << '\n';
  os << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace ftlab::xp
