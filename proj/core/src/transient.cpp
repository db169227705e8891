#include "nlos/transient.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "nlos/threading.hpp"

namespace nlos {

double TransientVolume::total() const {
  double sum = 0.0;
  for (double v : data) sum += v;
  return sum;
}

double TransientVolume::peak() const {
  double best = 0.0;
  for (double v : data) best = std::max(best, v);
  return best;
}

bool TransientVolume::finite_nonnegative() const {
  for (double v : data) {
    if (!(std::isfinite(v) && v >= 0.0)) return false;
  }
  return true;
}

void save_transient(const TransientVolume& volume, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write transient file: " + path);
  std::vector<float> f32(volume.data.size());
  for (size_t i = 0; i < f32.size(); ++i) f32[i] = static_cast<float>(volume.data[i]);
  out.write(reinterpret_cast<const char*>(f32.data()),
            static_cast<std::streamsize>(f32.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path);

  nlohmann::json j;
  j["shape"] = {volume.nx, volume.ny, volume.n_bins};
  j["bin_ps"] = volume.bin_width_ps;
  j["wall_extent_m"] = {volume.wall_width_m, volume.wall_height_m};
  j["material"] = material_name(volume.material);
  j["scale"] = "arbitrary";
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot write sidecar: " + path + ".json");
  side << j.dump(2) << "\n";
}

TransientVolume load_transient(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot open sidecar: " + path + ".json");
  nlohmann::json j = nlohmann::json::parse(side);

  TransientVolume volume;
  volume.nx = j.at("shape").at(0).get<int>();
  volume.ny = j.at("shape").at(1).get<int>();
  volume.n_bins = j.at("shape").at(2).get<int>();
  volume.bin_width_ps = j.at("bin_ps").get<double>();
  volume.wall_width_m = j.at("wall_extent_m").at(0).get<double>();
  volume.wall_height_m = j.at("wall_extent_m").at(1).get<double>();
  if (j.contains("material")) volume.material = material_from_name(j["material"]);

  size_t count = static_cast<size_t>(volume.nx) * volume.ny * volume.n_bins;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open transient file: " + path);
  std::vector<float> f32(count);
  in.read(reinterpret_cast<char*>(f32.data()), static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != count * sizeof(float)) {
    throw std::runtime_error("transient file truncated: " + path);
  }
  volume.data.assign(f32.begin(), f32.end());
  return volume;
}

namespace {

// Stratified sample locations on the unit square, mapped to barycentric
// coordinates with the square-root parameterization. Deterministic.
void stratified_barycentric(int n, std::vector<std::array<double, 3>>& out) {
  out.clear();
  out.reserve(n);
  int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (int i = 0; i < n; ++i) {
    double u = (i % m + 0.5) / m;
    double v = (i / m + 0.5) / m;
    double su = std::sqrt(u);
    out.push_back({1.0 - su, su * (1.0 - v), su * v});
  }
}

}  // namespace

TransientVolume render(const TriangleMesh& mesh, const Bvh& bvh, const SceneConfig& config,
                       const RenderOptions& options) {
  if (options.samples_per_triangle < 1) {
    throw std::invalid_argument("samples_per_triangle must be >= 1");
  }
  if (mesh.empty()) throw std::invalid_argument("empty geometry");

  TransientVolume volume;
  volume.nx = config.wall.nx;
  volume.ny = config.wall.ny;
  volume.n_bins = config.n_bins;
  volume.bin_width_ps = config.bin_width_ps;
  volume.wall_width_m = config.wall.width_m;
  volume.wall_height_m = config.wall.height_m;
  volume.material = config.material;
  volume.data.assign(static_cast<size_t>(volume.nx) * volume.ny * volume.n_bins, 0.0);

  const int spp = options.samples_per_triangle;
  std::vector<std::array<double, 3>> pattern;
  stratified_barycentric(spp, pattern);

  // per-sample geometry, shared across scan positions
  struct Sample {
    Vec3 position;
    Vec3 normal;
    double weight;  // albedo * area / spp
  };
  std::vector<Sample> samples;
  samples.reserve(mesh.triangle_count() * spp);
  for (uint32_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec3 v0 = mesh.vertex(t, 0), v1 = mesh.vertex(t, 1), v2 = mesh.vertex(t, 2);
    Vec3 n = mesh.normal(t);
    double w = mesh.albedo[t] * mesh.area(t) / spp;
    for (const auto& b : pattern) {
      samples.push_back({b[0] * v0 + b[1] * v1 + b[2] * v2, n, w});
    }
  }

  const double bin_s = config.bin_width_ps * 1e-12;
  const int exp_cos = config.material == Material::kDiffuse ? 2 : 4;
  const int exp_dist = config.material == Material::kDiffuse ? 4 : 2;
  const int n_scan = volume.nx * volume.ny;
  std::atomic<bool> overflow{false};

  parallel_for(n_scan, [&](int64_t lo, int64_t hi) {
    for (int64_t scan = lo; scan < hi; ++scan) {
      int ix = static_cast<int>(scan) / volume.ny;
      int iy = static_cast<int>(scan) % volume.ny;
      Vec3 s = config.wall.position(ix, iy);
      double* hist = &volume.at(ix, iy, 0);
      for (const Sample& sample : samples) {
        Vec3 to_wall = s - sample.position;
        double dist = length(to_wall);
        double cos_theta = dot(sample.normal, to_wall) / dist;
        if (cos_theta <= 0.0) continue;  // back-facing
        if (segment_occluded(bvh, sample.position, s)) continue;

        double tau = 2.0 * dist / kSpeedOfLightMs;
        double fbin = tau / bin_s;
        double falloff = std::pow(cos_theta, exp_cos) / std::pow(dist, exp_dist);
        double energy = sample.weight * falloff;
        if (options.two_bin_split) {
          int b0 = static_cast<int>(std::floor(fbin));
          double w1 = fbin - b0;
          if (b0 + 1 >= volume.n_bins) {
            overflow.store(true, std::memory_order_relaxed);
            continue;
          }
          hist[b0] += energy * (1.0 - w1);
          hist[b0 + 1] += energy * w1;
        } else {
          int bin = static_cast<int>(std::llround(fbin));
          if (bin >= volume.n_bins) {
            overflow.store(true, std::memory_order_relaxed);
            continue;
          }
          hist[bin] += energy;
        }
      }
    }
  });

  if (overflow.load()) throw std::invalid_argument("histogram too short");
  return volume;
}

}  // namespace nlos
