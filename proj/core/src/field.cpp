#include "nlos/field.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "nlos/errors.hpp"
#include "nlos/rng.hpp"

namespace nlos {

namespace {

constexpr int kChunk = 8192;
constexpr double kPi = 3.14159265358979323846;

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

}  // namespace

void PositionalEncoding::encode(const Vec3& p, double* out) const {
  int at = 0;
  if (include_raw) {
    out[at++] = p.x;
    out[at++] = p.y;
    out[at++] = p.z;
  }
  double freq = kPi;
  for (int l = 0; l < n_frequencies; ++l) {
    out[at++] = std::sin(freq * p.x);
    out[at++] = std::sin(freq * p.y);
    out[at++] = std::sin(freq * p.z);
    out[at++] = std::cos(freq * p.x);
    out[at++] = std::cos(freq * p.y);
    out[at++] = std::cos(freq * p.z);
    freq *= 2.0;
  }
}

std::vector<double> encode_position(const Vec3& p, const PositionalEncoding& enc) {
  std::vector<double> out(enc.dim());
  enc.encode(p, out.data());
  return out;
}

OcclusionField::OcclusionField(const FieldConfig& config, uint64_t seed) : config_(config) {
  if (config_.encoding.n_frequencies < 0) throw std::invalid_argument("negative frequency count");
  if (config_.code_dim < 0) throw std::invalid_argument("negative code dimension");
  if (config_.conditioned) {
    if (config_.transient_nx <= 0 || config_.transient_ny <= 0 || config_.transient_nt <= 0) {
      throw std::invalid_argument("conditioned mode requires the transient shape");
    }
    if (config_.transient_nt % config_.encoder_pool != 0) {
      throw std::invalid_argument("bin count must be divisible by the encoder pool factor");
    }
  }

  auto push = [this](const std::string& name, size_t rows, size_t cols) {
    Tensor t;
    t.name = name;
    t.offset = params_.size();
    t.rows = rows;
    t.cols = cols;
    layout_.push_back(t);
    params_.resize(params_.size() + rows * cols, 0.0);
  };

  if (config_.conditioned) {
    push("encoder.w1", config_.encoder_hidden, config_.encoder_input_dim());
    push("encoder.b1", config_.encoder_hidden, 1);
    push("encoder.w2", config_.code_dim, config_.encoder_hidden);
    push("encoder.b2", config_.code_dim, 1);
  } else if (config_.code_dim > 0) {
    push("code", config_.code_dim, 1);
  }
  int in_dim = config_.input_dim();
  for (size_t l = 0; l < config_.hidden_layers.size(); ++l) {
    int out_dim = config_.hidden_layers[l];
    push("decoder.w" + std::to_string(l), out_dim, in_dim);
    push("decoder.b" + std::to_string(l), out_dim, 1);
    in_dim = out_dim;
  }
  push("decoder.w_out", 1, in_dim);
  push("decoder.b_out", 1, 1);

  // fan-in uniform init; the output layer stays zero so the field starts
  // at probability 0.5 everywhere
  Rng rng(seed);
  for (const Tensor& t : layout_) {
    if (t.name == "code" || t.name == "decoder.w_out" || t.name == "decoder.b_out") continue;
    if (t.cols == 1) continue;  // biases stay zero
    double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
    for (size_t i = 0; i < t.size(); ++i) {
      params_[t.offset + i] = rng.uniform(-bound, bound);
    }
  }
}

namespace {

struct FieldView {
  const FieldConfig* cfg;
  const std::vector<OcclusionField::Tensor>* layout;
  const double* params;

  ConstMatrixMap map(const std::string& name) const {
    for (const auto& t : *layout) {
      if (t.name == name) {
        return ConstMatrixMap(params + t.offset, t.rows, t.cols);
      }
    }
    throw std::logic_error("unknown tensor: " + name);
  }
  size_t offset(const std::string& name) const {
    for (const auto& t : *layout) {
      if (t.name == name) return t.offset;
    }
    throw std::logic_error("unknown tensor: " + name);
  }
};

Vec3 normalize_point(const Aabb& domain, const Vec3& p) {
  Vec3 e = domain.extent();
  return {2.0 * (p.x - domain.lo.x) / e.x - 1.0, 2.0 * (p.y - domain.lo.y) / e.y - 1.0,
          2.0 * (p.z - domain.lo.z) / e.z - 1.0};
}

// log1p + temporal average pool + flatten, the fixed preprocessing in front
// of the encoder
Vector encoder_input(const FieldConfig& cfg, const TransientVolume& m) {
  if (m.nx != cfg.transient_nx || m.ny != cfg.transient_ny || m.n_bins != cfg.transient_nt) {
    throw std::invalid_argument("transient shape does not match the field configuration");
  }
  int pooled = cfg.transient_nt / cfg.encoder_pool;
  Vector x(cfg.encoder_input_dim());
  size_t at = 0;
  for (int ix = 0; ix < m.nx; ++ix) {
    for (int iy = 0; iy < m.ny; ++iy) {
      for (int t = 0; t < pooled; ++t) {
        double acc = 0.0;
        for (int q = 0; q < cfg.encoder_pool; ++q) {
          acc += std::log1p(m.at(ix, iy, t * cfg.encoder_pool + q));
        }
        x[at++] = acc / cfg.encoder_pool;
      }
    }
  }
  return x;
}

struct EncoderCache {
  Vector input, z1, h1, code;
};

EncoderCache encoder_forward(const FieldView& view, const TransientVolume& m) {
  EncoderCache cache;
  cache.input = encoder_input(*view.cfg, m);
  auto w1 = view.map("encoder.w1");
  auto b1 = view.map("encoder.b1");
  auto w2 = view.map("encoder.w2");
  auto b2 = view.map("encoder.b2");
  cache.z1 = w1 * cache.input + b1.col(0);
  cache.h1 = cache.z1.unaryExpr([](double v) { return softplus(v); });
  cache.code = w2 * cache.h1 + b2.col(0);
  return cache;
}

// Builds the decoder input block for points [lo, hi): tiled code on top,
// positional encoding below.
void build_input(const FieldConfig& cfg, const Vector& code, const std::vector<Vec3>& points,
                 size_t lo, size_t hi, Matrix& x) {
  int enc_dim = cfg.encoding.dim();
  x.resize(cfg.input_dim(), static_cast<Eigen::Index>(hi - lo));
  std::vector<double> enc(enc_dim);
  for (size_t i = lo; i < hi; ++i) {
    Eigen::Index col = static_cast<Eigen::Index>(i - lo);
    if (cfg.code_dim > 0) x.col(col).head(cfg.code_dim) = code;
    cfg.encoding.encode(normalize_point(cfg.domain, points[i]), enc.data());
    for (int j = 0; j < enc_dim; ++j) x(cfg.code_dim + j, col) = enc[j];
  }
}

}  // namespace

std::vector<double> OcclusionField::forward(const std::vector<Vec3>& points,
                                            const TransientVolume* transient) const {
  FieldView view{&config_, &layout_, params_.data()};
  Vector code;
  if (config_.conditioned) {
    if (transient == nullptr) {
      throw std::invalid_argument("conditioned field requires a transient");
    }
    code = encoder_forward(view, *transient).code;
  } else if (config_.code_dim > 0) {
    code = view.map("code").col(0);
  }

  size_t n_layers = config_.hidden_layers.size();
  std::vector<double> out(points.size());
  Matrix x, z;
  for (size_t lo = 0; lo < points.size(); lo += kChunk) {
    size_t hi = std::min(points.size(), lo + kChunk);
    build_input(config_, code, points, lo, hi, x);
    for (size_t l = 0; l < n_layers; ++l) {
      auto w = view.map("decoder.w" + std::to_string(l));
      auto b = view.map("decoder.b" + std::to_string(l));
      z.noalias() = w * x;
      z.colwise() += b.col(0);
      x = z.unaryExpr([](double v) { return softplus(v); });
    }
    auto w = view.map("decoder.w_out");
    auto b = view.map("decoder.b_out");
    Eigen::RowVectorXd logits = (w * x).row(0);
    for (size_t i = lo; i < hi; ++i) {
      out[i] = sigmoid(logits[static_cast<Eigen::Index>(i - lo)] + b(0, 0));
    }
  }
  return out;
}

double bce_loss(const std::vector<double>& predictions, const std::vector<uint8_t>& labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("prediction/label size mismatch");
  }
  if (predictions.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    double p = std::clamp(predictions[i], kBceClip, 1.0 - kBceClip);
    sum += labels[i] ? -std::log(p) : -std::log1p(-p);
  }
  return sum / static_cast<double>(predictions.size());
}

double OcclusionField::loss_and_gradient(const std::vector<Vec3>& points,
                                         const std::vector<uint8_t>& labels,
                                         const TransientVolume* transient,
                                         std::vector<double>& grad) const {
  if (points.size() != labels.size()) throw std::invalid_argument("point/label size mismatch");
  if (points.empty()) throw std::invalid_argument("empty batch");

  FieldView view{&config_, &layout_, params_.data()};
  grad.assign(params_.size(), 0.0);

  EncoderCache enc_cache;
  Vector code;
  if (config_.conditioned) {
    if (transient == nullptr) {
      throw std::invalid_argument("conditioned field requires a transient");
    }
    enc_cache = encoder_forward(view, *transient);
    code = enc_cache.code;
  } else if (config_.code_dim > 0) {
    code = view.map("code").col(0);
  }

  const size_t n_layers = config_.hidden_layers.size();
  const double inv_batch = 1.0 / static_cast<double>(points.size());
  double loss_sum = 0.0;
  Vector code_grad = Vector::Zero(config_.code_dim);

  std::vector<Matrix> activations(n_layers + 1);  // a0 = input, a1..aL hidden
  std::vector<Matrix> pre_activations(n_layers);
  Matrix delta;

  for (size_t lo = 0; lo < points.size(); lo += kChunk) {
    size_t hi = std::min(points.size(), lo + kChunk);
    Eigen::Index m = static_cast<Eigen::Index>(hi - lo);
    build_input(config_, code, points, lo, hi, activations[0]);

    for (size_t l = 0; l < n_layers; ++l) {
      auto w = view.map("decoder.w" + std::to_string(l));
      auto b = view.map("decoder.b" + std::to_string(l));
      pre_activations[l].noalias() = w * activations[l];
      pre_activations[l].colwise() += b.col(0);
      activations[l + 1] = pre_activations[l].unaryExpr([](double v) { return softplus(v); });
    }
    auto w_out = view.map("decoder.w_out");
    auto b_out = view.map("decoder.b_out");
    Eigen::RowVectorXd logits = (w_out * activations[n_layers]).row(0);

    // logit gradients; clipped predictions contribute zero
    Eigen::RowVectorXd dlogit(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      double p = sigmoid(logits[j] + b_out(0, 0));
      double y = labels[lo + j] ? 1.0 : 0.0;
      double pc = std::clamp(p, kBceClip, 1.0 - kBceClip);
      loss_sum += y > 0.5 ? -std::log(pc) : -std::log1p(-pc);
      dlogit[j] = (p <= kBceClip || p >= 1.0 - kBceClip) ? 0.0 : (p - y) * inv_batch;
    }

    // output layer
    MatrixMap(grad.data() + view.offset("decoder.w_out"), 1, w_out.cols()).noalias() +=
        dlogit * activations[n_layers].transpose();
    grad[view.offset("decoder.b_out")] += dlogit.sum();

    delta = w_out.transpose() * dlogit;  // d loss / d a_L
    for (size_t l = n_layers; l-- > 0;) {
      // through the smooth rectifier: d softplus = sigmoid
      delta.array() *=
          pre_activations[l].unaryExpr([](double v) { return sigmoid(v); }).array();
      auto w = view.map("decoder.w" + std::to_string(l));
      MatrixMap(grad.data() + view.offset("decoder.w" + std::to_string(l)), w.rows(), w.cols())
          .noalias() += delta * activations[l].transpose();
      MatrixMap(grad.data() + view.offset("decoder.b" + std::to_string(l)), w.rows(), 1)
          .col(0) += delta.rowwise().sum();
      if (l > 0 || config_.code_dim > 0) {
        delta = (w.transpose() * delta).eval();
      }
    }
    if (config_.code_dim > 0) {
      code_grad.noalias() += delta.topRows(config_.code_dim).rowwise().sum();
    }
  }

  if (config_.conditioned) {
    auto w2 = view.map("encoder.w2");
    MatrixMap(grad.data() + view.offset("encoder.w2"), w2.rows(), w2.cols()).noalias() +=
        code_grad * enc_cache.h1.transpose();
    MatrixMap(grad.data() + view.offset("encoder.b2"), w2.rows(), 1).col(0) += code_grad;
    Vector dz1 = (w2.transpose() * code_grad).cwiseProduct(
        enc_cache.z1.unaryExpr([](double v) { return sigmoid(v); }));
    auto w1 = view.map("encoder.w1");
    MatrixMap(grad.data() + view.offset("encoder.w1"), w1.rows(), w1.cols()).noalias() +=
        dz1 * enc_cache.input.transpose();
    MatrixMap(grad.data() + view.offset("encoder.b1"), w1.rows(), 1).col(0) += dz1;
  } else if (config_.code_dim > 0) {
    MatrixMap(grad.data() + view.offset("code"), config_.code_dim, 1).col(0) += code_grad;
  }

  return loss_sum * inv_batch;
}

FitReport fit(OcclusionField& field, const std::vector<FitScene>& scenes,
              const FitConfig& config) {
  if (scenes.empty()) throw std::invalid_argument("no training scenes");
  for (const auto& scene : scenes) {
    if (scene.samples == nullptr || scene.samples->count() == 0) {
      throw std::invalid_argument("empty sample set");
    }
    if (field.config().conditioned && scene.transient == nullptr) {
      throw std::invalid_argument("conditioned fit requires a transient per scene");
    }
  }
  if (config.steps <= 0 || config.batch_size <= 0) {
    throw std::invalid_argument("steps and batch size must be positive");
  }

  auto t_start = std::chrono::steady_clock::now();
  Rng rng(config.seed);

  // per-scene train/validation split
  struct Split {
    std::vector<uint32_t> train, val;
  };
  std::vector<Split> splits(scenes.size());
  for (size_t s = 0; s < scenes.size(); ++s) {
    size_t n = scenes[s].samples->count();
    std::vector<uint32_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
    for (size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    size_t n_val = static_cast<size_t>(config.val_fraction * n);
    if (config.val_fraction > 0.0 && n_val == 0 && n > 1) n_val = 1;
    splits[s].val.assign(order.begin(), order.begin() + n_val);
    splits[s].train.assign(order.begin() + n_val, order.end());
    if (splits[s].train.empty()) throw std::invalid_argument("no training points after split");
  }

  auto validation_loss = [&]() {
    double sum = 0.0;
    size_t total = 0;
    for (size_t s = 0; s < scenes.size(); ++s) {
      if (splits[s].val.empty()) continue;
      std::vector<Vec3> pts(splits[s].val.size());
      std::vector<uint8_t> lbl(splits[s].val.size());
      for (size_t i = 0; i < splits[s].val.size(); ++i) {
        pts[i] = scenes[s].samples->points[splits[s].val[i]];
        lbl[i] = scenes[s].samples->global_label[splits[s].val[i]];
      }
      auto pred = field.forward(pts, scenes[s].transient);
      sum += bce_loss(pred, lbl) * static_cast<double>(pts.size());
      total += pts.size();
    }
    return total == 0 ? 0.0 : sum / static_cast<double>(total);
  };

  FitReport report;
  report.steps = config.steps;
  for (const auto& split : splits) {
    report.train_count += split.train.size();
    report.val_count += split.val.size();
  }

  std::vector<double>& params = field.parameters();
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
  std::vector<double> grad, prev_params;
  std::vector<double> best_params;
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<Vec3> batch_points(config.batch_size);
  std::vector<uint8_t> batch_labels(config.batch_size);

  for (int step = 1; step <= config.steps; ++step) {
    const size_t scene_idx = static_cast<size_t>((step - 1) % scenes.size());
    const auto& samples = *scenes[scene_idx].samples;
    const auto& train = splits[scene_idx].train;
    for (int i = 0; i < config.batch_size; ++i) {
      uint32_t idx = train[rng.uniform_index(train.size())];
      batch_points[i] = samples.points[idx];
      batch_labels[i] = samples.global_label[idx];
    }

    prev_params = params;
    double loss = field.loss_and_gradient(batch_points, batch_labels,
                                          scenes[scene_idx].transient, grad);
    if (!std::isfinite(loss)) {
      params = prev_params;
      throw NumericError("fit diverged: non-finite loss at step " + std::to_string(step));
    }
    report.step_loss.push_back(loss);

    double lr = config.learning_rate;
    if (config.cosine_decay) {
      lr *= 0.5 * (1.0 + std::cos(kPi * (step - 1) / config.steps));
    }
    double bias1 = 1.0 - std::pow(config.beta1, step);
    double bias2 = 1.0 - std::pow(config.beta2, step);
    bool finite = true;
    for (size_t i = 0; i < params.size(); ++i) {
      double g = grad[i];
      if (!std::isfinite(g)) {
        finite = false;
        break;
      }
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      params[i] -= lr * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + config.adam_eps);
    }
    if (!finite) {
      params = prev_params;
      throw NumericError("fit diverged: non-finite gradient at step " + std::to_string(step));
    }

    if (step % config.eval_every == 0 || step == config.steps) {
      double val = validation_loss();
      if (!std::isfinite(val)) {
        params = prev_params;
        throw NumericError("fit diverged: non-finite validation loss");
      }
      report.val_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        best_params = params;
      }
    }
  }

  if (!best_params.empty()) params = best_params;
  report.best_val_loss = best_val;

  // IoU of thresholded predictions on the held-out points
  {
    size_t inter = 0, uni = 0;
    for (size_t s = 0; s < scenes.size(); ++s) {
      if (splits[s].val.empty()) continue;
      std::vector<Vec3> pts(splits[s].val.size());
      std::vector<uint8_t> lbl(splits[s].val.size());
      for (size_t i = 0; i < splits[s].val.size(); ++i) {
        pts[i] = scenes[s].samples->points[splits[s].val[i]];
        lbl[i] = scenes[s].samples->global_label[splits[s].val[i]];
      }
      auto pred = field.forward(pts, scenes[s].transient);
      for (size_t i = 0; i < pred.size(); ++i) {
        bool p = pred[i] > 0.5;
        bool g = lbl[i] != 0;
        inter += p && g;
        uni += p || g;
      }
    }
    report.val_iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

void save_field(const OcclusionField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write field file: " + path);
  const char magic[8] = {'N', 'L', 'O', 'S', 'O', 'F', 'L', 'D'};
  uint32_t version = 1;
  uint8_t dtype = 0;  // f64
  uint32_t n_tensors = static_cast<uint32_t>(field.layout_.size());
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&dtype), 1);
  out.write(reinterpret_cast<const char*>(&n_tensors), 4);
  for (const auto& t : field.layout_) {
    uint32_t name_len = static_cast<uint32_t>(t.name.size());
    uint64_t rows = t.rows, cols = t.cols;
    out.write(reinterpret_cast<const char*>(&name_len), 4);
    out.write(t.name.data(), name_len);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(field.params_.data() + t.offset),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);

  const FieldConfig& cfg = field.config_;
  nlohmann::json j;
  j["version"] = version;
  j["encoding"] = {{"frequencies", cfg.encoding.n_frequencies},
                   {"include_raw", cfg.encoding.include_raw}};
  j["code_dim"] = cfg.code_dim;
  j["hidden_layers"] = cfg.hidden_layers;
  j["domain"] = {{"lo", {cfg.domain.lo.x, cfg.domain.lo.y, cfg.domain.lo.z}},
                 {"hi", {cfg.domain.hi.x, cfg.domain.hi.y, cfg.domain.hi.z}}};
  j["conditioned"] = cfg.conditioned;
  if (cfg.conditioned) {
    j["transient_shape"] = {cfg.transient_nx, cfg.transient_ny, cfg.transient_nt};
    j["encoder_pool"] = cfg.encoder_pool;
    j["encoder_hidden"] = cfg.encoder_hidden;
  }
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot write sidecar: " + path + ".json");
  side << j.dump(2) << "\n";
}

OcclusionField load_field(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot open sidecar: " + path + ".json");
  nlohmann::json j = nlohmann::json::parse(side);

  FieldConfig cfg;
  cfg.encoding.n_frequencies = j.at("encoding").at("frequencies").get<int>();
  cfg.encoding.include_raw = j.at("encoding").at("include_raw").get<bool>();
  cfg.code_dim = j.at("code_dim").get<int>();
  cfg.hidden_layers = j.at("hidden_layers").get<std::vector<int>>();
  auto lo = j.at("domain").at("lo");
  auto hi = j.at("domain").at("hi");
  cfg.domain.lo = {lo.at(0).get<double>(), lo.at(1).get<double>(), lo.at(2).get<double>()};
  cfg.domain.hi = {hi.at(0).get<double>(), hi.at(1).get<double>(), hi.at(2).get<double>()};
  cfg.conditioned = j.at("conditioned").get<bool>();
  if (cfg.conditioned) {
    cfg.transient_nx = j.at("transient_shape").at(0).get<int>();
    cfg.transient_ny = j.at("transient_shape").at(1).get<int>();
    cfg.transient_nt = j.at("transient_shape").at(2).get<int>();
    cfg.encoder_pool = j.at("encoder_pool").get<int>();
    cfg.encoder_hidden = j.at("encoder_hidden").get<int>();
  }

  OcclusionField field(cfg, 0);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open field file: " + path);
  char magic[8];
  uint32_t version = 0, n_tensors = 0;
  uint8_t dtype = 0;
  in.read(magic, 8);
  if (std::memcmp(magic, "NLOSOFLD", 8) != 0) {
    throw std::runtime_error("bad magic in field file: " + path);
  }
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&dtype), 1);
  in.read(reinterpret_cast<char*>(&n_tensors), 4);
  if (version != 1 || dtype != 0) throw std::runtime_error("unsupported field file version");
  if (n_tensors != field.layout_.size()) {
    throw std::runtime_error("tensor count mismatch in field file");
  }
  for (const auto& t : field.layout_) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), 4);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw std::runtime_error("tensor layout mismatch in field file: " + name);
    }
    in.read(reinterpret_cast<char*>(field.params_.data() + t.offset),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw std::runtime_error("field file truncated: " + path);
  }
  return field;
}

}  // namespace nlos
