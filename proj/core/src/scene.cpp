#include "nlos/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "nlos/mesh_io.hpp"

namespace nlos {

namespace {
constexpr double kSpeedOfLight = 299792458.0;  // m/s
}

std::string material_name(Material m) {
  return m == Material::kDiffuse ? "diffuse" : "retroreflective";
}

Material material_from_name(const std::string& name) {
  if (name == "diffuse") return Material::kDiffuse;
  if (name == "retroreflective") return Material::kRetroreflective;
  throw std::invalid_argument("unknown material: " + name);
}

double SceneConfig::histogram_range_m() const {
  return 0.5 * n_bins * bin_width_ps * 1e-12 * kSpeedOfLight;
}

double SceneConfig::max_path_m() const {
  Aabb cube = hidden_cube();
  double best = 0.0;
  for (int ix : {0, wall.nx - 1}) {
    for (int iy : {0, wall.ny - 1}) {
      Vec3 s = wall.position(ix, iy);
      for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy)
          for (int cz = 0; cz < 2; ++cz) {
            Vec3 corner{cx ? cube.hi.x : cube.lo.x, cy ? cube.hi.y : cube.lo.y,
                        cz ? cube.hi.z : cube.lo.z};
            best = std::max(best, length(corner - s));
          }
    }
  }
  return best;
}

SceneConfig preset_config(const std::string& name) {
  SceneConfig config;
  if (name == "confocal-small") {
    config.wall = {0.70, 0.70, 32, 32};
    config.bin_width_ps = 32.0;
    config.n_bins = 256;
    config.z_near = 0.35;
  } else if (name == "confocal-large") {
    config.wall = {2.0, 2.0, 32, 32};
    config.bin_width_ps = 64.0;
    config.n_bins = 256;
    config.z_near = 0.5;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return config;
}

AffineTransform sample_placement(Rng& rng, const AffineRanges& ranges) {
  AffineTransform xf;
  xf.scale = rng.uniform(ranges.scale_min, ranges.scale_max);
  xf.rotation_deg = {rng.uniform(0.0, ranges.rot_x_max_deg),
                     rng.uniform(0.0, ranges.rot_y_max_deg),
                     rng.uniform(0.0, ranges.rot_z_max_deg)};
  xf.translation = {rng.uniform(-ranges.trans_xy, ranges.trans_xy),
                    rng.uniform(-ranges.trans_xy, ranges.trans_xy),
                    rng.uniform(-ranges.trans_z, ranges.trans_z)};
  return xf;
}

AffineTransform sample_placement(Rng& rng, const AffineRanges& ranges, const TriangleMesh& mesh,
                                 int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    AffineTransform xf = sample_placement(rng, ranges);
    try {
      apply_transform(mesh, xf);
      return xf;
    } catch (const std::runtime_error&) {
      // escaped the cube, resample
    }
  }
  throw std::runtime_error("unplaceable mesh");
}

SceneConfig SceneDescription::config() const {
  SceneConfig cfg = preset_config(preset);
  if (z_near_override >= 0.0) cfg.z_near = z_near_override;
  if (!material_override.empty()) cfg.material = material_from_name(material_override);
  cfg.seed = seed;
  return cfg;
}

std::string scene_to_json(const SceneDescription& scene) {
  nlohmann::json j;
  j["preset"] = scene.preset;
  j["seed"] = scene.seed;
  j["placements"] = nlohmann::json::array();
  for (const auto& p : scene.placements) {
    nlohmann::json pj;
    pj["mesh"] = p.mesh_id;
    pj["scale"] = p.transform.scale;
    pj["rot_deg"] = {p.transform.rotation_deg.x, p.transform.rotation_deg.y,
                     p.transform.rotation_deg.z};
    pj["trans"] = {p.transform.translation.x, p.transform.translation.y,
                   p.transform.translation.z};
    j["placements"].push_back(pj);
  }
  if (scene.z_near_override >= 0.0) j["z_near"] = scene.z_near_override;
  if (!scene.material_override.empty()) j["material"] = scene.material_override;
  return j.dump(2) + "\n";
}

SceneDescription scene_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  SceneDescription scene;
  scene.preset = j.at("preset").get<std::string>();
  scene.seed = j.at("seed").get<uint64_t>();
  for (const auto& pj : j.at("placements")) {
    ScenePlacement p;
    p.mesh_id = pj.at("mesh").get<std::string>();
    p.transform.scale = pj.at("scale").get<double>();
    auto rot = pj.at("rot_deg");
    p.transform.rotation_deg = {rot.at(0).get<double>(), rot.at(1).get<double>(),
                                rot.at(2).get<double>()};
    auto tr = pj.at("trans");
    p.transform.translation = {tr.at(0).get<double>(), tr.at(1).get<double>(),
                               tr.at(2).get<double>()};
    scene.placements.push_back(p);
  }
  if (j.contains("z_near")) scene.z_near_override = j["z_near"].get<double>();
  if (j.contains("material")) scene.material_override = j["material"].get<std::string>();
  return scene;
}

void save_scene(const SceneDescription& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << scene_to_json(scene);
}

SceneDescription load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return scene_from_json(text);
}

void MeshLibrary::add(const std::string& id, TriangleMesh mesh) {
  mesh.cleanup();
  if (mesh.empty()) throw std::invalid_argument("empty geometry: " + id);
  mesh.normalize_unit_cube();
  meshes_[id] = std::move(mesh);
}

const TriangleMesh& MeshLibrary::get(const std::string& id) const {
  auto it = meshes_.find(id);
  if (it == meshes_.end()) throw std::runtime_error("mesh not in library: " + id);
  return it->second;
}

std::vector<std::string> MeshLibrary::ids() const {
  std::vector<std::string> out;
  out.reserve(meshes_.size());
  for (const auto& [id, mesh] : meshes_) out.push_back(id);
  return out;
}

MeshLibrary MeshLibrary::from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("mesh directory not found: " + dir);
  MeshLibrary lib;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".obj") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    lib.add(f.stem().string(), load_obj(f.string()));
  }
  if (lib.size() == 0) throw std::runtime_error("no .obj meshes in " + dir);
  return lib;
}

std::pair<TriangleMesh, Bvh> build_scene(const SceneConfig& config,
                                         const std::vector<ScenePlacement>& placements,
                                         const MeshLibrary& library) {
  if (placements.empty()) throw std::invalid_argument("empty scene");
  TriangleMesh world;
  Vec3 to_world = config.hidden_cube().center();
  for (const auto& p : placements) {
    TriangleMesh placed = apply_transform(library.get(p.mesh_id), p.transform);
    for (Vec3& v : placed.vertices) v += to_world;
    world.merge(placed);
  }
  Bvh bvh = build_bvh(world);
  return {std::move(world), std::move(bvh)};
}

WallScanGrid sensor_grid(const SceneConfig& config, int n) {
  if (n <= 0) throw std::invalid_argument("sensor grid size must be positive");
  WallScanGrid g = config.wall;
  g.nx = n;
  g.ny = n;
  return g;
}

}  // namespace nlos
