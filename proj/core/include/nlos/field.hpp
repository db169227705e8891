#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlos/occlusion.hpp"
#include "nlos/transient.hpp"
#include "nlos/vec.hpp"

namespace nlos {

// Sine-cosine frequency encoding applied per coordinate. The input point is
// expected in [-1, 1]^3; the layout is [raw?, sin(2^0 pi p), cos(2^0 pi p),
// ..., sin(2^{L-1} pi p), cos(2^{L-1} pi p)], each block of size 3.
struct PositionalEncoding {
  int n_frequencies = 6;
  bool include_raw = true;

  int dim() const { return 3 * (2 * n_frequencies + (include_raw ? 1 : 0)); }
  void encode(const Vec3& p, double* out) const;
};

std::vector<double> encode_position(const Vec3& p, const PositionalEncoding& enc);

struct FieldConfig {
  PositionalEncoding encoding;
  int code_dim = 128;
  std::vector<int> hidden_layers = {128, 128, 128, 128};
  Aabb domain;  // hidden cube, mapped to [-1,1]^3 before encoding

  // transient-conditioned mode (learned shape code from the measurement)
  bool conditioned = false;
  int transient_nx = 0, transient_ny = 0, transient_nt = 0;
  int encoder_pool = 4;    // temporal average-pool factor
  int encoder_hidden = 64;

  int input_dim() const { return code_dim + encoding.dim(); }
  int encoder_input_dim() const { return transient_nx * transient_ny * (transient_nt / encoder_pool); }
};

// Trainable occlusion probability field: a fully-connected decoder over
// [shape code, positional encoding] with smooth-rectifier activations and a
// logistic output. In single-scene mode the code is a learned constant; in
// conditioned mode it comes from a two-layer encoder over the log-scaled,
// temporally pooled transient. All math in double; gradients are exact
// reverse-mode.
class OcclusionField {
 public:
  struct Tensor {
    std::string name;
    size_t offset = 0;
    size_t rows = 0, cols = 0;  // cols == 1 for vectors
    size_t size() const { return rows * cols; }
  };

  OcclusionField() = default;
  explicit OcclusionField(const FieldConfig& config, uint64_t seed = 0);

  const FieldConfig& config() const { return config_; }
  const std::vector<Tensor>& tensors() const { return layout_; }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // One probability in (0, 1) per point. transient may be null in
  // single-scene mode and is required in conditioned mode.
  std::vector<double> forward(const std::vector<Vec3>& points,
                              const TransientVolume* transient = nullptr) const;

  // Mean binary cross-entropy and its exact gradient w.r.t. every
  // parameter. grad is resized to parameters().size().
  double loss_and_gradient(const std::vector<Vec3>& points, const std::vector<uint8_t>& labels,
                           const TransientVolume* transient, std::vector<double>& grad) const;

 private:
  FieldConfig config_;
  std::vector<Tensor> layout_;
  std::vector<double> params_;

  friend void save_field(const OcclusionField&, const std::string&);
  friend OcclusionField load_field(const std::string&);
};

// Predictions are clipped to [1e-7, 1 - 1e-7] before the log.
inline constexpr double kBceClip = 1e-7;
double bce_loss(const std::vector<double>& predictions, const std::vector<uint8_t>& labels);

struct FitConfig {
  int steps = 2000;
  int batch_size = 20000;
  double learning_rate = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double val_fraction = 0.1;
  int eval_every = 50;
  uint64_t seed = 0;
  bool cosine_decay = false;
};

struct FitReport {
  std::vector<double> step_loss;
  std::vector<double> val_loss;
  double best_val_loss = 0.0;
  double val_iou = 0.0;  // at the retained weights, threshold 0.5
  size_t train_count = 0, val_count = 0;
  int steps = 0;
  double wall_seconds = 0.0;
};

struct FitScene {
  const OcclusionSampleSet* samples = nullptr;
  const TransientVolume* transient = nullptr;  // conditioned mode only
};

// Adam on the BCE objective; scenes alternate round-robin. Keeps the weights
// with the best validation loss. Throws NumericError on divergence with the
// last finite parameters restored.
FitReport fit(OcclusionField& field, const std::vector<FitScene>& scenes,
              const FitConfig& config);

inline FitReport fit(OcclusionField& field, const OcclusionSampleSet& samples,
                     const FitConfig& config) {
  return fit(field, std::vector<FitScene>{{&samples, nullptr}}, config);
}

// Versioned binary weights plus a JSON metadata sidecar at <path>.json.
void save_field(const OcclusionField& field, const std::string& path);
OcclusionField load_field(const std::string& path);

}  // namespace nlos
