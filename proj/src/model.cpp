// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0

#include "ftlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ftlab/kernels.hpp"
#include "ftlab/parallel.hpp"
#include "ftlab/rng.hpp"

namespace ftlab::nn {

namespace {
constexpr std::uint64_t kMemberStream = 0x4d454d42ull;  // member init/shuffle
constexpr double kMinStd = 1e-12;
}  // namespace

std::string to_string(StateMode mode) {
  return mode == StateMode::kStatic ? "static" : "dynamic";
}

StateMode state_mode_from_string(const std::string& s) {
  if (s == "static") return StateMode::kStatic;
  if (s == "dynamic") return StateMode::kDynamic;
  throw FormatError("unknown state mode: '" + s + "'");
}

void featurize(const StateSample& s, double x_f_z, StateMode mode,
               double* out) {
  int i = 0;
  out[i++] = s.z;
  out[i++] = s.z_dot;
  if (mode == StateMode::kDynamic) out[i++] = s.v;
  out[i++] = s.f_z;
  out[i++] = x_f_z;
}

void NetworkConfig::validate() const {
  if (n_estimators < 1 || hidden_layers < 1 || neurons_per_layer < 1 ||
      epochs < 1 || batch_size < 1)
    throw ConfigError("network topology/training counts must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (activation != "relu")
    throw ConfigError("unsupported activation: " + activation);
  if (fusion != "average") throw ConfigError("unsupported fusion: " + fusion);
  if (loss != "mse") throw ConfigError("unsupported loss: " + loss);
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0) || plateau_patience < 1)
    throw ConfigError("invalid learning-rate plateau settings");
}

// ---------------------------------------------------------------------------
// Normalization

namespace {
void check_stats(std::size_t n, const std::vector<double>& mean,
                 const std::vector<double>& std_dev) {
  if (mean.size() != n || std_dev.size() != n)
    throw ShapeError("normalization statistics size mismatch");
  for (double s : std_dev)
    if (!(s > 0.0) || !std::isfinite(s))
      throw DegenerateData("non-positive standard deviation");
}
}  // namespace

std::vector<double> normalize(const std::vector<double>& x,
                              const std::vector<double>& mean,
                              const std::vector<double>& std_dev) {
  check_stats(x.size(), mean, std_dev);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = (x[i] - mean[i]) / std_dev[i];
  return out;
}

std::vector<double> denormalize(const std::vector<double>& x,
                                const std::vector<double>& mean,
                                const std::vector<double>& std_dev) {
  check_stats(x.size(), mean, std_dev);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] * std_dev[i] + mean[i];
  return out;
}

// ---------------------------------------------------------------------------
// Members

Member make_member(int in_dim, int out_dim, int hidden_layers, int width) {
  Member m;
  std::size_t off = 0;
  int in = in_dim;
  for (int l = 0; l < hidden_layers + 1; ++l) {
    const int out = (l == hidden_layers) ? out_dim : width;
    LayerShape shape;
    shape.in = in;
    shape.out = out;
    shape.w_off = off;
    off += static_cast<std::size_t>(in) * out;
    shape.b_off = off;
    off += out;
    m.layers.push_back(shape);
    in = out;
  }
  m.params.assign(off, 0.0);
  return m;
}

void Workspace::ensure(const std::vector<LayerShape>& layers, int batch_rows) {
  std::vector<int> want{layers.front().in};
  for (const auto& l : layers) want.push_back(l.out);
  if (rows >= batch_rows && want == dims) return;
  rows = std::max(rows, batch_rows);
  dims = want;
  act.assign(dims.size(), {});
  int max_dim = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    act[i].assign(static_cast<std::size_t>(rows) * dims[i], 0.0);
    max_dim = std::max(max_dim, dims[i]);
  }
  dz_a.assign(static_cast<std::size_t>(rows) * max_dim, 0.0);
  dz_b.assign(static_cast<std::size_t>(rows) * max_dim, 0.0);
  xnorm.assign(static_cast<std::size_t>(rows) * dims.front(), 0.0);
  fused.assign(static_cast<std::size_t>(rows) * dims.back(), 0.0);
}

const double* member_forward(const Member& member, const double* X, int rows,
                             Workspace& ws) {
  ws.ensure(member.layers, rows);
  const auto& ops = kern::active();
  std::copy(X, X + static_cast<std::size_t>(rows) * member.layers.front().in,
            ws.act[0].begin());
  const int n_layers = static_cast<int>(member.layers.size());
  for (int l = 0; l < n_layers; ++l) {
    const LayerShape& shape = member.layers[l];
    const double* in = ws.act[l].data();
    double* out = ws.act[l + 1].data();
    ops.gemm_nn(in, member.params.data() + shape.w_off, out, rows, shape.out,
                shape.in);
    ops.add_bias(out, member.params.data() + shape.b_off, rows, shape.out);
    if (l + 1 < n_layers)
      ops.relu(out, static_cast<std::size_t>(rows) * shape.out);
  }
  return ws.act[n_layers].data();
}

double backprop(const Member& member, const double* X, const double* T,
                int rows, Workspace& ws, std::vector<double>& grads) {
  if (grads.size() != member.params.size())
    grads.assign(member.params.size(), 0.0);
  const double* pred = member_forward(member, X, rows, ws);
  const auto& ops = kern::active();
  const int n_layers = static_cast<int>(member.layers.size());
  const int odim = member.layers.back().out;
  const std::size_t out_count = static_cast<std::size_t>(rows) * odim;
  const double inv_count = 1.0 / static_cast<double>(out_count);

  double* dz = ws.dz_a.data();
  double* dz_next = ws.dz_b.data();
  const double sse = ops.mse_grad(pred, T, dz, out_count, inv_count);

  for (int l = n_layers - 1; l >= 0; --l) {
    const LayerShape& shape = member.layers[l];
    const double* a_prev = ws.act[l].data();
    ops.gemm_tn(a_prev, dz, grads.data() + shape.w_off, shape.in, shape.out,
                rows);
    ops.col_sums(dz, grads.data() + shape.b_off, rows, shape.out);
    if (l > 0) {
      ops.gemm_nt(dz, member.params.data() + shape.w_off, dz_next, rows,
                  shape.in, shape.out);
      // post-ReLU activations are positive exactly where preactivations are
      ops.relu_mask(a_prev, dz_next, static_cast<std::size_t>(rows) * shape.in);
      std::swap(dz, dz_next);
    }
  }
  return sse * inv_count;
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(std::vector<double>& weights, const std::vector<double>& grads,
               AdamState& st, double lr) {
  if (weights.size() != grads.size())
    throw ShapeError("adam: weight/gradient size mismatch");
  if (st.m.size() != weights.size()) st.m.assign(weights.size(), 0.0);
  if (st.v.size() != weights.size()) st.v.assign(weights.size(), 0.0);
  st.t += 1;
  const double inv_bc1 = 1.0 / (1.0 - std::pow(st.beta1, st.t));
  const double inv_bc2 = 1.0 / (1.0 - std::pow(st.beta2, st.t));
  kern::active().adam_update(weights.data(), grads.data(), st.m.data(),
                             st.v.data(), weights.size(), lr, st.beta1,
                             st.beta2, st.epsilon, inv_bc1, inv_bc2);
}

// ---------------------------------------------------------------------------
// Ensemble inference

std::vector<double> forward(const StateSample& s, double x_f_z,
                            const Member& member, const NormStats& norm,
                            StateMode mode) {
  const int idim = input_dim(mode);
  if (member.layers.front().in != idim ||
      member.layers.back().out != state_dim(mode))
    throw ShapeError("member topology does not match state mode");
  std::vector<double> raw(idim);
  featurize(s, x_f_z, mode, raw.data());
  const std::vector<double> x = normalize(raw, norm.in_mean, norm.in_std);
  Workspace ws;
  const double* y = member_forward(member, x.data(), 1, ws);
  std::vector<double> out(y, y + state_dim(mode));
  return denormalize(out, norm.out_mean, norm.out_std);
}

void predict_delta_batch(const EnsembleModel& model, const double* X, int rows,
                         Workspace& ws, double* out) {
  if (!model.trained) throw ModelNotReady("ensemble has not been trained");
  const int idim = model.in_dim();
  const int odim = model.out_dim();
  ws.ensure(model.members.front().layers, rows);

  // normalize inputs once, shared by all members
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < idim; ++c)
      ws.xnorm[static_cast<std::size_t>(r) * idim + c] =
          (X[static_cast<std::size_t>(r) * idim + c] - model.norm.in_mean[c]) /
          model.norm.in_std[c];

  const std::size_t count = static_cast<std::size_t>(rows) * odim;
  std::fill(ws.fused.begin(), ws.fused.begin() + count, 0.0);
  for (const Member& member : model.members) {
    const double* y = member_forward(member, ws.xnorm.data(), rows, ws);
    for (std::size_t i = 0; i < count; ++i) ws.fused[i] += y[i];
  }
  const double inv_n = 1.0 / static_cast<double>(model.members.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < odim; ++c) {
      const double mean_delta =
          ws.fused[static_cast<std::size_t>(r) * odim + c] * inv_n;
      out[static_cast<std::size_t>(r) * odim + c] =
          mean_delta * model.norm.out_std[c] + model.norm.out_mean[c];
    }
}

StateSample predict_next(const StateSample& s, double x_c_z,
                         const EnsembleModel& model, Workspace& ws) {
  double raw[5];
  featurize(s, x_c_z, model.state_mode, raw);
  double delta[4] = {0.0, 0.0, 0.0, 0.0};
  predict_delta_batch(model, raw, 1, ws, delta);
  StateSample next = s;
  next.z += delta[0];
  next.z_dot += delta[1];
  if (model.state_mode == StateMode::kDynamic) {
    next.v += delta[2];
    next.f_z += delta[3];
  } else {
    next.f_z += delta[2];
  }
  return next;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct ColumnStats {
  std::vector<double> mean, std_dev;
};

ColumnStats column_stats(const std::vector<double>& data, int count,
                         int width) {
  ColumnStats st;
  st.mean.assign(width, 0.0);
  st.std_dev.assign(width, 0.0);
  for (int r = 0; r < count; ++r)
    for (int c = 0; c < width; ++c)
      st.mean[c] += data[static_cast<std::size_t>(r) * width + c];
  for (int c = 0; c < width; ++c) st.mean[c] /= count;
  for (int r = 0; r < count; ++r)
    for (int c = 0; c < width; ++c) {
      const double d =
          data[static_cast<std::size_t>(r) * width + c] - st.mean[c];
      st.std_dev[c] += d * d;
    }
  for (int c = 0; c < width; ++c) {
    st.std_dev[c] = std::sqrt(st.std_dev[c] / count);
    if (!std::isfinite(st.mean[c]) || !std::isfinite(st.std_dev[c]))
      throw DegenerateData("non-finite feature statistics");
    if (st.std_dev[c] < kMinStd)
      throw DegenerateData("feature with zero variance");
  }
  return st;
}

std::vector<double> normalized_copy(const std::vector<double>& data, int count,
                                    int width, const ColumnStats& st) {
  std::vector<double> out(data.size());
  for (int r = 0; r < count; ++r)
    for (int c = 0; c < width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * width + c;
      out[i] = (data[i] - st.mean[c]) / st.std_dev[c];
    }
  return out;
}

double eval_mse(const Member& member, const std::vector<double>& X,
                const std::vector<double>& T, int count, int idim, int odim,
                Workspace& ws) {
  const int chunk = 2048;
  double sse = 0.0;
  for (int start = 0; start < count; start += chunk) {
    const int rows = std::min(chunk, count - start);
    const double* pred = member_forward(
        member, X.data() + static_cast<std::size_t>(start) * idim, rows, ws);
    const double* t = T.data() + static_cast<std::size_t>(start) * odim;
    const std::size_t n = static_cast<std::size_t>(rows) * odim;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pred[i] - t[i];
      sse += d * d;
    }
  }
  return sse / (static_cast<double>(count) * odim);
}

}  // namespace

TrainResult train(const TrainingSet& train_set, const TrainingSet& val_set,
                  const NetworkConfig& cfg, std::uint64_t seed,
                  unsigned threads) {
  cfg.validate();
  if (train_set.count <= 0) throw DegenerateData("empty training set");
  if (val_set.count <= 0) throw DegenerateData("empty validation set");
  if (train_set.mode != val_set.mode)
    throw ShapeError("train/validation state-mode mismatch");

  const StateMode mode = train_set.mode;
  const int idim = input_dim(mode);
  const int odim = state_dim(mode);

  const ColumnStats in_stats = column_stats(train_set.X, train_set.count, idim);
  const ColumnStats out_stats =
      column_stats(train_set.Y, train_set.count, odim);

  const std::vector<double> x_tr =
      normalized_copy(train_set.X, train_set.count, idim, in_stats);
  const std::vector<double> y_tr =
      normalized_copy(train_set.Y, train_set.count, odim, out_stats);
  const std::vector<double> x_val =
      normalized_copy(val_set.X, val_set.count, idim, in_stats);
  const std::vector<double> y_val =
      normalized_copy(val_set.Y, val_set.count, odim, out_stats);

  TrainResult result;
  result.model.state_mode = mode;
  result.model.config = cfg;
  result.model.norm.in_mean = in_stats.mean;
  result.model.norm.in_std = in_stats.std_dev;
  result.model.norm.out_mean = out_stats.mean;
  result.model.norm.out_std = out_stats.std_dev;
  result.model.members.resize(cfg.n_estimators);
  result.report.member_epochs.resize(cfg.n_estimators);

  parallel_for(cfg.n_estimators, threads, [&](std::size_t mi) {
    Rng rng(derive_seed(seed, kMemberStream, mi));
    Member member =
        make_member(idim, odim, cfg.hidden_layers, cfg.neurons_per_layer);
    for (const LayerShape& shape : member.layers) {
      const double limit = std::sqrt(6.0 / shape.in);
      double* w = member.params.data() + shape.w_off;
      const std::size_t n = static_cast<std::size_t>(shape.in) * shape.out;
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-limit, limit);
      // biases stay zero
    }

    AdamState adam;
    std::vector<double> grads(member.params.size(), 0.0);
    Workspace ws;
    std::vector<int> order(train_set.count);
    for (int i = 0; i < train_set.count; ++i) order[i] = i;
    std::vector<double> xb(static_cast<std::size_t>(cfg.batch_size) * idim);
    std::vector<double> tb(static_cast<std::size_t>(cfg.batch_size) * odim);

    double lr = cfg.learning_rate;
    double best_val = std::numeric_limits<double>::infinity();
    int wait = 0;
    auto& epochs = result.report.member_epochs[mi];

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order);
      double sse = 0.0;
      for (int start = 0; start < train_set.count; start += cfg.batch_size) {
        const int rows = std::min(cfg.batch_size, train_set.count - start);
        for (int r = 0; r < rows; ++r) {
          const int src = order[start + r];
          std::copy_n(x_tr.data() + static_cast<std::size_t>(src) * idim, idim,
                      xb.data() + static_cast<std::size_t>(r) * idim);
          std::copy_n(y_tr.data() + static_cast<std::size_t>(src) * odim, odim,
                      tb.data() + static_cast<std::size_t>(r) * odim);
        }
        const double batch_mse =
            backprop(member, xb.data(), tb.data(), rows, ws, grads);
        sse += batch_mse * rows * odim;
        adam_step(member.params, grads, adam, lr);
      }
      EpochRecord rec;
      rec.train_mse = sse / (static_cast<double>(train_set.count) * odim);
      if (!std::isfinite(rec.train_mse))
        throw DivergenceError("training loss diverged");
      rec.val_mse =
          eval_mse(member, x_val, y_val, val_set.count, idim, odim, ws);
      rec.lr = lr;
      epochs.push_back(rec);

      if (rec.val_mse < best_val - 1e-12) {
        best_val = rec.val_mse;
        wait = 0;
      } else if (++wait >= cfg.plateau_patience) {
        lr *= cfg.plateau_factor;
        wait = 0;
      }
    }
    result.model.members[mi] = std::move(member);
  });

  result.model.trained = true;
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {
constexpr int kModelFormatVersion = 1;

void write_vector(std::ostream& os, const char* tag,
                  const std::vector<double>& v) {
  os << tag;
  for (double x : v) os << ' ' << format_double(x);
  os << '\n';
}

std::vector<double> read_vector(std::istream& is, const std::string& tag,
                                std::size_t n) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("model file truncated");
  std::istringstream ss(line);
  std::string got;
  ss >> got;
  if (got != tag) throw FormatError("expected '" + tag + "', got '" + got + "'");
  std::vector<double> v;
  std::string tok;
  while (ss >> tok) v.push_back(parse_double(tok));
  if (v.size() != n) throw FormatError("bad vector length for " + tag);
  return v;
}

std::vector<double> read_row(std::istream& is, std::size_t n) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("model file truncated");
  std::istringstream ss(line);
  std::vector<double> v;
  v.reserve(n);
  std::string tok;
  while (ss >> tok) v.push_back(parse_double(tok));
  if (v.size() != n) throw FormatError("bad weight row length");
  return v;
}
}  // namespace

void save_model(const EnsembleModel& model, const std::string& path) {
  if (!model.trained) throw ModelNotReady("refusing to save untrained model");
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for write: " + path);
  os << "ftlab-model " << kModelFormatVersion << ' '
     << to_string(model.state_mode) << ' ' << model.in_dim() << ' '
     << model.out_dim() << ' ' << model.config.hidden_layers << ' '
     << model.config.neurons_per_layer << ' ' << model.members.size() << '\n';
  write_vector(os, "in_mean", model.norm.in_mean);
  write_vector(os, "in_std", model.norm.in_std);
  write_vector(os, "out_mean", model.norm.out_mean);
  write_vector(os, "out_std", model.norm.out_std);
  for (std::size_t mi = 0; mi < model.members.size(); ++mi) {
    const Member& m = model.members[mi];
    os << "member " << mi << '\n';
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
      const LayerShape& shape = m.layers[li];
      os << "layer " << li << ' ' << shape.in << ' ' << shape.out << '\n';
      for (int r = 0; r < shape.in; ++r) {
        const double* w =
            m.params.data() + shape.w_off + static_cast<std::size_t>(r) * shape.out;
        for (int c = 0; c < shape.out; ++c)
          os << (c ? " " : "") << format_double(w[c]);
        os << '\n';
      }
      const double* b = m.params.data() + shape.b_off;
      for (int c = 0; c < shape.out; ++c)
        os << (c ? " " : "") << format_double(b[c]);
      os << '\n';
    }
  }
  if (!os) throw InputError("write failed: " + path);
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open: " + path);
  std::string magic;
  int version = 0, idim = 0, odim = 0, hidden = 0, width = 0;
  std::size_t n_members = 0;
  std::string mode_str;
  {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty model file");
    std::istringstream ss(line);
    ss >> magic >> version >> mode_str >> idim >> odim >> hidden >> width >>
        n_members;
    if (magic != "ftlab-model") throw FormatError("not a model file");
    if (version != kModelFormatVersion)
      throw FormatError("unsupported model format version " +
                        std::to_string(version));
  }
  EnsembleModel model;
  model.state_mode = state_mode_from_string(mode_str);
  if (idim != model.in_dim() || odim != model.out_dim())
    throw FormatError("model dimensions inconsistent with state mode");
  model.config.hidden_layers = hidden;
  model.config.neurons_per_layer = width;
  model.config.n_estimators = static_cast<int>(n_members);
  model.norm.in_mean = read_vector(is, "in_mean", idim);
  model.norm.in_std = read_vector(is, "in_std", idim);
  model.norm.out_mean = read_vector(is, "out_mean", odim);
  model.norm.out_std = read_vector(is, "out_std", odim);

  model.members.resize(n_members);
  for (std::size_t mi = 0; mi < n_members; ++mi) {
    std::string line;
    if (!std::getline(is, line) || line != "member " + std::to_string(mi))
      throw FormatError("bad member header");
    Member m = make_member(idim, odim, hidden, width);
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
      const LayerShape& shape = m.layers[li];
      if (!std::getline(is, line) ||
          line != "layer " + std::to_string(li) + ' ' +
                      std::to_string(shape.in) + ' ' +
                      std::to_string(shape.out))
        throw FormatError("bad layer header");
      for (int r = 0; r < shape.in; ++r) {
        auto row = read_row(is, shape.out);
        std::copy(row.begin(), row.end(),
                  m.params.begin() + shape.w_off +
                      static_cast<std::size_t>(r) * shape.out);
      }
      auto bias = read_row(is, shape.out);
      std::copy(bias.begin(), bias.end(), m.params.begin() + shape.b_off);
    }
    model.members[mi] = std::move(m);
  }
  model.trained = true;
  return model;
}

}  // namespace ftlab::nn
