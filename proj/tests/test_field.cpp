#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "nlos/errors.hpp"
#include "nlos/field.hpp"
#include "nlos/scene.hpp"
#include "support/fixtures.hpp"

using namespace nlos;
using namespace nlos::testing;

namespace {

FieldConfig tiny_config(const Aabb& domain) {
  FieldConfig cfg;
  cfg.encoding.n_frequencies = 2;
  cfg.encoding.include_raw = true;
  cfg.code_dim = 4;
  cfg.hidden_layers = {8, 8};
  cfg.domain = domain;
  return cfg;
}

// central finite differences against the analytic gradient, every parameter
void check_gradients(OcclusionField& field, const std::vector<Vec3>& points,
                     const std::vector<uint8_t>& labels, const TransientVolume* transient) {
  std::vector<double> grad;
  field.loss_and_gradient(points, labels, transient, grad);

  const double h = 1e-4;
  std::vector<double>& params = field.parameters();
  size_t worst_at = 0;
  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    double save = params[i];
    std::vector<double> unused;
    params[i] = save + h;
    double up = field.loss_and_gradient(points, labels, transient, unused);
    params[i] = save - h;
    double down = field.loss_and_gradient(points, labels, transient, unused);
    params[i] = save;
    double fd = (up - down) / (2.0 * h);
    double rel = std::abs(fd - grad[i]) / std::max(1e-6, std::abs(fd) + std::abs(grad[i]));
    if (rel > worst) {
      worst = rel;
      worst_at = i;
    }
  }
  INFO("worst relative error ", worst, " at parameter ", worst_at);
  CHECK(worst < 1e-4);
}

}  // namespace

TEST_CASE("positional encoding at the origin is all zeros and ones") {
  PositionalEncoding enc{2, true};
  auto q = encode_position({0, 0, 0}, enc);
  REQUIRE(static_cast<int>(q.size()) == enc.dim());
  REQUIRE(q.size() == 3 + 2 * 6);
  for (int i = 0; i < 3; ++i) CHECK(q[i] == 0.0);          // raw
  for (int l = 0; l < 2; ++l) {
    for (int i = 0; i < 3; ++i) CHECK(q[3 + 6 * l + i] == 0.0);        // sin
    for (int i = 0; i < 3; ++i) CHECK(q[3 + 6 * l + 3 + i] == 1.0);    // cos
  }
}

TEST_CASE("zero frequencies with raw coordinates is the identity") {
  PositionalEncoding enc{0, true};
  CHECK(enc.dim() == 3);
  auto q = encode_position({0.3, -0.7, 0.1}, enc);
  CHECK(q[0] == 0.3);
  CHECK(q[1] == -0.7);
  CHECK(q[2] == 0.1);
}

TEST_CASE("encoded values are bounded by one") {
  PositionalEncoding enc{6, false};
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (double v : encode_position(p, enc)) CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("a fresh field predicts one half everywhere") {
  SceneConfig config = preset_config("confocal-small");
  OcclusionField field(tiny_config(config.hidden_cube()), 5);
  Rng rng(5);
  std::vector<Vec3> points;
  for (int i = 0; i < 50; ++i) points.push_back(random_in(config.hidden_cube(), rng));
  for (double p : field.forward(points)) CHECK(p == 0.5);
}

TEST_CASE("duplicated points give identical outputs") {
  SceneConfig config = preset_config("confocal-small");
  OcclusionField field(tiny_config(config.hidden_cube()), 7);
  // push the field away from the trivial constant
  Rng rng(9);
  for (double& p : field.parameters()) p += 0.1 * rng.uniform(-1.0, 1.0);

  Vec3 p{0.1, -0.2, 0.9};
  std::vector<Vec3> batch{p, {0.3, 0.1, 1.0}, p, p};
  auto out = field.forward(batch);
  CHECK(out[0] == out[2]);
  CHECK(out[0] == out[3]);
  CHECK(out[0] != out[1]);
}

TEST_CASE("bce fixtures: exact fit, coin flip, and the clip ceiling") {
  std::vector<uint8_t> labels{1, 0, 1, 0};
  std::vector<double> exact{1.0, 0.0, 1.0, 0.0};
  CHECK(bce_loss(exact, labels) <= 1e-6);

  std::vector<double> half{0.5, 0.5, 0.5, 0.5};
  CHECK(bce_loss(half, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  std::vector<double> wrong{0.0, 1.0, 0.0, 1.0};
  CHECK(bce_loss(wrong, labels) == doctest::Approx(-std::log(1e-7)).epsilon(1e-4));

  CHECK_THROWS_AS(bce_loss({0.5}, labels), std::invalid_argument);
}

TEST_CASE("analytic gradients match finite differences (single-scene)") {
  SceneConfig config = preset_config("confocal-small");
  OcclusionField field(tiny_config(config.hidden_cube()), 11);
  Rng rng(13);
  // nonzero output layer so the loss actually depends on everything
  for (double& p : field.parameters()) p += 0.05 * rng.uniform(-1.0, 1.0);

  std::vector<Vec3> points;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 24; ++i) {
    points.push_back(random_in(config.hidden_cube(), rng));
    labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
  }
  check_gradients(field, points, labels, nullptr);
}

TEST_CASE("analytic gradients match finite differences (conditioned)") {
  SceneConfig config = preset_config("confocal-small");
  FieldConfig cfg = tiny_config(config.hidden_cube());
  cfg.conditioned = true;
  cfg.transient_nx = 2;
  cfg.transient_ny = 2;
  cfg.transient_nt = 8;
  cfg.encoder_pool = 4;
  cfg.encoder_hidden = 4;
  OcclusionField field(cfg, 17);
  Rng rng(19);
  for (double& p : field.parameters()) p += 0.05 * rng.uniform(-1.0, 1.0);

  TransientVolume m;
  m.nx = 2;
  m.ny = 2;
  m.n_bins = 8;
  m.bin_width_ps = 32.0;
  m.data.resize(32);
  for (double& v : m.data) v = rng.uniform(0.0, 10.0);

  std::vector<Vec3> points;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 16; ++i) {
    points.push_back(random_in(config.hidden_cube(), rng));
    labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
  }
  check_gradients(field, points, labels, &m);
}

TEST_CASE("gradient vanishes at a perfectly fit zero-loss configuration") {
  SceneConfig config = preset_config("confocal-small");
  FieldConfig cfg = tiny_config(config.hidden_cube());
  OcclusionField field(cfg, 23);

  // drive the output bias to saturation so predictions clip at the labels
  std::vector<Vec3> points{{0.0, 0.0, 0.85}, {0.2, 0.2, 1.0}};
  std::vector<uint8_t> labels{1, 1};
  auto& tensors = field.tensors();
  size_t bias_offset = 0;
  for (const auto& t : tensors) {
    if (t.name == "decoder.b_out") bias_offset = t.offset;
  }
  field.parameters()[bias_offset] = 50.0;  // sigmoid(50) clips to 1 - 1e-7

  std::vector<double> grad;
  double loss = field.loss_and_gradient(points, labels, nullptr, grad);
  CHECK(loss <= 1e-6);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
  SceneConfig config = preset_config("confocal-small");
  OcclusionField field(tiny_config(config.hidden_cube()), 29);
  Rng rng(31);
  for (double& p : field.parameters()) p += 0.05 * rng.uniform(-1.0, 1.0);

  std::vector<Vec3> points;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 10; ++i) {
    points.push_back(random_in(config.hidden_cube(), rng));
    labels.push_back(i % 2);
  }
  std::vector<Vec3> doubled = points;
  doubled.insert(doubled.end(), points.begin(), points.end());
  std::vector<uint8_t> doubled_labels = labels;
  doubled_labels.insert(doubled_labels.end(), labels.begin(), labels.end());

  std::vector<double> g1, g2;
  double l1 = field.loss_and_gradient(points, labels, nullptr, g1);
  double l2 = field.loss_and_gradient(doubled, doubled_labels, nullptr, g2);
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
  for (size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-9));
  }
}

TEST_CASE("an all-zero label set drives the field to zero") {
  SceneConfig config = preset_config("confocal-small");
  Rng rng(37);
  OcclusionSampleSet set;
  set.n_sensors = 25;
  set.k = 1;
  for (int i = 0; i < 4000; ++i) {
    set.points.push_back(random_in(config.hidden_cube(), rng));
    set.global_label.push_back(0);
  }
  set.sensor_bits.assign(set.count() * set.stride(), 0);

  OcclusionField field(tiny_config(config.hidden_cube()), 41);
  FitConfig fit_cfg;
  fit_cfg.steps = 300;
  fit_cfg.batch_size = 512;
  fit_cfg.seed = 43;
  fit(field, set, fit_cfg);

  std::vector<Vec3> probe;
  for (int i = 0; i < 500; ++i) probe.push_back(random_in(config.hidden_cube(), rng));
  for (double p : field.forward(probe)) CHECK(p < 0.05);
}

TEST_CASE("fit reports decreasing loss and retains best-validation weights") {
  SceneConfig config = preset_config("confocal-small");
  Rng rng(47);
  OcclusionSampleSet set;
  set.n_sensors = 25;
  set.k = 1;
  // synthetic half-space labels: occluded iff z > 0.85
  for (int i = 0; i < 6000; ++i) {
    Vec3 p = random_in(config.hidden_cube(), rng);
    set.points.push_back(p);
    set.global_label.push_back(p.z > 0.85 ? 1 : 0);
  }
  set.sensor_bits.assign(set.count() * set.stride(), 0);

  OcclusionField field(tiny_config(config.hidden_cube()), 53);
  FitConfig fit_cfg;
  fit_cfg.steps = 400;
  fit_cfg.batch_size = 1024;
  fit_cfg.seed = 59;
  FitReport report = fit(field, set, fit_cfg);

  REQUIRE(!report.step_loss.empty());
  double first = report.step_loss.front();
  double last = report.step_loss.back();
  CHECK(last < first);
  CHECK(report.val_iou > 0.9);
  CHECK(report.train_count + report.val_count == set.count());
  CHECK(std::isfinite(report.best_val_loss));
}

TEST_CASE("weights round-trip bit-exactly through the field file") {
  namespace fs = std::filesystem;
  SceneConfig config = preset_config("confocal-small");
  OcclusionField field(tiny_config(config.hidden_cube()), 61);
  Rng rng(67);
  for (double& p : field.parameters()) p += rng.uniform(-0.5, 0.5);

  fs::path path = fs::temp_directory_path() / "nlos_test_field.bin";
  save_field(field, path.string());
  OcclusionField loaded = load_field(path.string());

  REQUIRE(loaded.parameters().size() == field.parameters().size());
  for (size_t i = 0; i < field.parameters().size(); ++i) {
    CHECK(loaded.parameters()[i] == field.parameters()[i]);
  }

  std::vector<Vec3> probe;
  for (int i = 0; i < 100; ++i) probe.push_back(random_in(config.hidden_cube(), rng));
  auto a = field.forward(probe);
  auto b = loaded.forward(probe);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  fs::remove(path);
  fs::remove(path.string() + ".json");
}

TEST_CASE("seeded fits are reproducible") {
  SceneConfig config = preset_config("confocal-small");
  Rng rng(71);
  OcclusionSampleSet set;
  set.n_sensors = 25;
  set.k = 1;
  for (int i = 0; i < 2000; ++i) {
    Vec3 p = random_in(config.hidden_cube(), rng);
    set.points.push_back(p);
    set.global_label.push_back(p.z > 0.9 ? 1 : 0);
  }
  set.sensor_bits.assign(set.count() * set.stride(), 0);

  FitConfig fit_cfg;
  fit_cfg.steps = 50;
  fit_cfg.batch_size = 256;
  fit_cfg.seed = 73;

  OcclusionField a(tiny_config(config.hidden_cube()), 79);
  OcclusionField b(tiny_config(config.hidden_cube()), 79);
  fit(a, set, fit_cfg);
  fit(b, set, fit_cfg);
  REQUIRE(a.parameters().size() == b.parameters().size());
  for (size_t i = 0; i < a.parameters().size(); ++i) {
    CHECK(a.parameters()[i] == b.parameters()[i]);
  }
}

TEST_CASE("conditioned forward requires a transient and matching shape") {
  SceneConfig config = preset_config("confocal-small");
  FieldConfig cfg = tiny_config(config.hidden_cube());
  cfg.conditioned = true;
  cfg.transient_nx = 2;
  cfg.transient_ny = 2;
  cfg.transient_nt = 8;
  cfg.encoder_pool = 4;
  OcclusionField field(cfg, 83);

  std::vector<Vec3> probe{{0, 0, 0.9}};
  CHECK_THROWS_AS(field.forward(probe, nullptr), std::invalid_argument);

  TransientVolume wrong;
  wrong.nx = 4;
  wrong.ny = 4;
  wrong.n_bins = 8;
  wrong.data.resize(128, 0.0);
  CHECK_THROWS_AS(field.forward(probe, &wrong), std::invalid_argument);
}
