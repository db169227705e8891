#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nlos/occlusion.hpp"
#include "nlos/scene.hpp"
#include "support/fixtures.hpp"

using namespace nlos;
using namespace nlos::testing;

namespace {

struct PlateScene {
  SceneConfig config = preset_config("confocal-small");
  TriangleMesh mesh;
  std::vector<Vec3> sensors;

  PlateScene() {
    mesh = plate_world(config, 0.7, 4);
    sensors = sensor_grid(config, 5).positions();
  }
};

}  // namespace

TEST_CASE("a point behind the plate is occluded, a point in front is not") {
  PlateScene scene;
  Bvh bvh = build_bvh(scene.mesh);
  double plate_z = scene.mesh.vertices[0].z;
  Vec3 sensor = scene.sensors[12];  // center sensor

  Vec3 behind{0.0, 0.0, plate_z + 0.2};
  Vec3 in_front{0.0, 0.0, plate_z - 0.2};
  CHECK(local_occlusion(bvh, behind, sensor));
  CHECK(!local_occlusion(bvh, in_front, sensor));
}

TEST_CASE("local occlusion matches the analytic sphere oracle") {
  SceneConfig config = preset_config("confocal-small");
  const Vec3 center = config.hidden_cube().center();
  const double radius = 0.3;
  TriangleMesh sphere = make_sphere(5);
  for (Vec3& v : sphere.vertices) v = v * (2.0 * radius) + center;
  Bvh bvh = build_bvh(sphere);

  Rng rng(21);
  Aabb cube = config.hidden_cube();
  auto sensors = sensor_grid(config, 5).positions();
  int agree = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Vec3 p = random_in(cube, rng);
    const Vec3& s = sensors[i % sensors.size()];
    bool analytic = segment_hits_sphere(p, s, center, radius);
    bool traced = local_occlusion(bvh, p, s);
    agree += analytic == traced;
  }
  CHECK(static_cast<double>(agree) / n >= 0.999);
}

TEST_CASE("global occlusion counting semantics") {
  PlateScene scene;
  Bvh bvh = build_bvh(scene.mesh);
  double plate_z = scene.mesh.vertices[0].z;

  // directly behind the plate center: occluded for every sensor
  Vec3 deep{0.0, 0.0, plate_z + 0.05};
  for (int k : {1, 5, 25}) CHECK(global_occlusion(bvh, deep, scene.sensors, k));

  // in front of the plate: visible everywhere
  Vec3 open{0.0, 0.0, plate_z - 0.2};
  for (int k : {1, 5, 25}) CHECK(!global_occlusion(bvh, open, scene.sensors, k));

  CHECK_THROWS_AS(global_occlusion(bvh, deep, scene.sensors, 0), std::invalid_argument);
  CHECK_THROWS_AS(global_occlusion(bvh, deep, scene.sensors, 26), std::invalid_argument);
}

TEST_CASE("a point visible from exactly 3 sensors flips between k=1 and k=4") {
  SceneConfig config = preset_config("confocal-small");
  auto sensors = sensor_grid(config, 5).positions();
  const Vec3 p = config.hidden_cube().center();

  // one small quad per blocked sensor, sitting on the segment near the wall
  TriangleMesh blockers;
  for (size_t i = 3; i < sensors.size(); ++i) {
    double t = 0.05 / (p.z - sensors[i].z);
    Vec3 c = sensors[i] + t * (p - sensors[i]);
    uint32_t base = static_cast<uint32_t>(blockers.vertices.size());
    double h = 0.015;
    blockers.vertices.push_back({c.x - h, c.y - h, c.z});
    blockers.vertices.push_back({c.x + h, c.y - h, c.z});
    blockers.vertices.push_back({c.x + h, c.y + h, c.z});
    blockers.vertices.push_back({c.x - h, c.y + h, c.z});
    blockers.triangles.push_back({base, base + 1, base + 2});
    blockers.triangles.push_back({base, base + 2, base + 3});
  }
  blockers.albedo.assign(blockers.triangle_count(), 1.0);
  Bvh bvh = build_bvh(blockers);

  int visible = 0;
  for (const Vec3& s : sensors) visible += !local_occlusion(bvh, p, s);
  REQUIRE(visible == 3);

  CHECK(!global_occlusion(bvh, p, sensors, 1));  // visible under k=1
  CHECK(!global_occlusion(bvh, p, sensors, 3));
  CHECK(global_occlusion(bvh, p, sensors, 4));   // occluded under k=4
}

TEST_CASE("k=1 equals the literal product of local occlusion bits") {
  PlateScene scene;
  Bvh bvh = build_bvh(scene.mesh);
  Rng rng(37);
  Aabb cube = scene.config.hidden_cube();
  for (int i = 0; i < 2000; ++i) {
    Vec3 p = random_in(cube, rng);
    int product = 1;
    for (const Vec3& s : scene.sensors) product *= local_occlusion(bvh, p, s) ? 1 : 0;
    CHECK(global_occlusion(bvh, p, scene.sensors, 1) == (product == 1));
  }
}

TEST_CASE("raising k never flips a point from occluded to visible") {
  PlateScene scene;
  Bvh bvh = build_bvh(scene.mesh);
  Rng rng(41);
  Aabb cube = scene.config.hidden_cube();
  for (int i = 0; i < 300; ++i) {
    Vec3 p = random_in(cube, rng);
    bool prev = false;
    for (int k = 1; k <= 25; ++k) {
      bool occluded = global_occlusion(bvh, p, scene.sensors, k);
      if (prev) CHECK(occluded);
      prev = occluded;
    }
  }
}

TEST_CASE("adding geometry never clears a visibility bit") {
  PlateScene scene;
  TriangleMesh bigger = scene.mesh;
  AffineTransform extra;
  extra.scale = 0.3;
  extra.translation = {0.2, 0.2, 0.3};
  bigger.merge(place_in_world(make_plate(2), extra, scene.config));

  Rng rng(43);
  std::vector<Vec3> points;
  for (int i = 0; i < 4000; ++i) points.push_back(random_in(scene.config.hidden_cube(), rng));

  Bvh small_bvh = build_bvh(scene.mesh);
  Bvh big_bvh = build_bvh(bigger);
  OcclusionSampleSet small_set = label_set(&small_bvh, points, scene.sensors, 1);
  OcclusionSampleSet big_set = label_set(&big_bvh, points, scene.sensors, 1);
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t s = 0; s < scene.sensors.size(); ++s) {
      if (small_set.sensor_bit(i, s)) CHECK(big_set.sensor_bit(i, s));
    }
    if (small_set.global_label[i]) CHECK(big_set.global_label[i]);
  }
}

TEST_CASE("uniform sampling passes a chi-square uniformity test") {
  SceneConfig config = preset_config("confocal-small");
  Aabb cube = config.hidden_cube();
  Rng rng(47);
  TriangleMesh none;
  auto points = sample_points(none, cube, 100000, 0.0, 0.001, 0.005, rng);
  REQUIRE(points.size() == 100000);

  const int g = 8;
  std::vector<int> counts(g * g * g, 0);
  for (const Vec3& p : points) {
    int i = std::min(g - 1, static_cast<int>((p.x - cube.lo.x) * g));
    int j = std::min(g - 1, static_cast<int>((p.y - cube.lo.y) * g));
    int k = std::min(g - 1, static_cast<int>((p.z - cube.lo.z) * g));
    counts[(i * g + j) * g + k] += 1;
  }
  double expect = 100000.0 / (g * g * g);
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;

  // chi-square 99th percentile at 511 dof (Wilson-Hilferty)
  double df = g * g * g - 1;
  double z = 2.326347874;
  double h = 2.0 / (9.0 * df);
  double critical = df * std::pow(1.0 - h + z * std::sqrt(h), 3.0);
  CHECK(chi2 < critical);
}

TEST_CASE("pure surface sampling with vanishing variance hugs the mesh") {
  SceneConfig config = preset_config("confocal-small");
  TriangleMesh plate = plate_world(config, 0.7, 4);
  double plate_z = plate.vertices[0].z;
  Rng rng(53);
  auto points = sample_points(plate, config.hidden_cube(), 20000, 1.0, 1e-12, 1e-12, rng);
  Aabb bounds = plate.bounds();
  for (const Vec3& p : points) {
    CHECK(std::abs(p.z - plate_z) <= 1e-3);
    CHECK(p.x >= bounds.lo.x - 1e-3);
    CHECK(p.x <= bounds.hi.x + 1e-3);
  }
}

TEST_CASE("labeled occupancy fraction matches a dense brute-force estimate") {
  SceneConfig config = preset_config("confocal-small");
  TriangleMesh plate = plate_world(config, 0.7, 4);
  Bvh bvh = build_bvh(plate);
  auto sensors = sensor_grid(config, 5).positions();
  Aabb cube = config.hidden_cube();

  Rng rng(59);
  TriangleMesh none;
  auto points = sample_points(none, cube, 200000, 0.0, 0.001, 0.005, rng);
  OcclusionSampleSet set = label_set(&bvh, points, sensors, 1);
  double fraction = 0.0;
  for (uint8_t label : set.global_label) fraction += label;
  fraction /= static_cast<double>(set.count());

  // exhaustive all-triangles labeling on a dense grid
  const int g = 48;
  size_t occluded = 0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      for (int k = 0; k < g; ++k) {
        Vec3 p{cube.lo.x + (i + 0.5) / g, cube.lo.y + (j + 0.5) / g, cube.lo.z + (k + 0.5) / g};
        bool all_blocked = true;
        for (const Vec3& s : sensors) {
          if (!brute_force_segment_occluded(plate, p, s)) {
            all_blocked = false;
            break;
          }
        }
        occluded += all_blocked;
      }
    }
  }
  double grid_fraction = static_cast<double>(occluded) / (g * g * g);
  CHECK(std::abs(fraction - grid_fraction) < 0.01);
}

TEST_CASE("empty scenes label everything visible") {
  SceneConfig config = preset_config("confocal-small");
  Rng rng(61);
  TriangleMesh none;
  auto points = sample_points(none, config.hidden_cube(), 500, 0.0, 0.001, 0.005, rng);
  auto sensors = sensor_grid(config, 5).positions();
  OcclusionSampleSet set = label_set(nullptr, points, sensors, 1);
  for (size_t i = 0; i < set.count(); ++i) {
    CHECK(set.global_label[i] == 0);
    CHECK(set.occluded_count(i) == 0);
  }
  set.validate();
}

TEST_CASE("a full-aperture blocking quad occludes every point behind it") {
  SceneConfig config = preset_config("confocal-small");
  TriangleMesh wall_quad;
  wall_quad.vertices = {{-2, -2, 0.6}, {2, -2, 0.6}, {2, 2, 0.6}, {-2, 2, 0.6}};
  wall_quad.triangles = {{0, 2, 1}, {0, 3, 2}};
  wall_quad.albedo = {1.0, 1.0};
  Bvh bvh = build_bvh(wall_quad);
  auto sensors = sensor_grid(config, 5).positions();

  Rng rng(67);
  std::vector<Vec3> points;
  for (int i = 0; i < 2000; ++i) {
    Vec3 p = random_in(config.hidden_cube(), rng);
    if (p.z > 0.7) points.push_back(p);
  }
  OcclusionSampleSet set = label_set(&bvh, points, sensors, 1);
  for (size_t i = 0; i < set.count(); ++i) {
    CHECK(set.global_label[i] == 1);
    CHECK(set.occluded_count(i) == sensors.size());
  }
}

TEST_CASE("sample files round-trip and are byte-stable") {
  namespace fs = std::filesystem;
  PlateScene scene;
  Bvh bvh = build_bvh(scene.mesh);
  Rng rng(71);
  auto points = sample_points(scene.mesh, scene.config.hidden_cube(), 3000, 0.7, 0.001, 0.005, rng);
  OcclusionSampleSet set = label_set(&bvh, points, scene.sensors, 1);

  fs::path a = fs::temp_directory_path() / "nlos_test_samples_a.bin";
  fs::path b = fs::temp_directory_path() / "nlos_test_samples_b.bin";
  save_samples(set, a.string());
  save_samples(set, b.string());

  auto read_all = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  CHECK(read_all(a) == read_all(b));

  OcclusionSampleSet loaded = load_samples(a.string());
  CHECK(loaded.count() == set.count());
  CHECK(loaded.n_sensors == set.n_sensors);
  CHECK(loaded.k == set.k);
  for (size_t i = 0; i < set.count(); ++i) {
    CHECK(loaded.global_label[i] == set.global_label[i]);
    CHECK(length(loaded.points[i] - set.points[i]) < 1e-6);
  }
  for (const fs::path& p : {a, b}) {
    fs::remove(p);
    fs::remove(p.string() + ".json");
  }
}

TEST_CASE("label ordering is independent of scheduling") {
  PlateScene scene;
  Bvh bvh = build_bvh(scene.mesh);
  Rng rng(73);
  std::vector<Vec3> points;
  for (int i = 0; i < 5000; ++i) points.push_back(random_in(scene.config.hidden_cube(), rng));

  OcclusionSampleSet once = label_set(&bvh, points, scene.sensors, 1);
  OcclusionSampleSet twice = label_set(&bvh, points, scene.sensors, 1);
  CHECK(once.global_label == twice.global_label);
  CHECK(once.sensor_bits == twice.sensor_bits);
}
