#include "nlos/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "nlos/threading.hpp"

namespace nlos {

bool global_occlusion(const Bvh& bvh, const Vec3& p, const std::vector<Vec3>& sensors, int k) {
  if (sensors.empty()) throw std::invalid_argument("sensor set is empty");
  int n = static_cast<int>(sensors.size());
  if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, N]");
  int occluded = 0;
  int visible = 0;
  for (const Vec3& s : sensors) {
    if (local_occlusion(bvh, p, s)) {
      ++occluded;
    } else if (++visible >= k) {
      return false;  // enough sensors see the point
    }
  }
  return occluded > n - k;
}

std::vector<Vec3> sample_points(const TriangleMesh& mesh, const Aabb& cube, size_t n_total,
                                double surface_fraction, double var_min, double var_max,
                                Rng& rng) {
  if (surface_fraction < 0.0 || surface_fraction > 1.0) {
    throw std::invalid_argument("surface_fraction must be in [0, 1]");
  }
  size_t n_surface = static_cast<size_t>(std::llround(surface_fraction * n_total));
  if (n_surface > 0 && mesh.empty()) throw std::invalid_argument("empty geometry");

  std::vector<Vec3> points;
  points.reserve(n_total);

  if (n_surface > 0) {
    std::vector<double> cumulative(mesh.triangle_count());
    double acc = 0.0;
    for (uint32_t t = 0; t < mesh.triangle_count(); ++t) {
      acc += mesh.area(t);
      cumulative[t] = acc;
    }
    if (acc <= 0.0) throw std::invalid_argument("mesh has zero area");
    for (size_t i = 0; i < n_surface; ++i) {
      double pick = rng.uniform() * acc;
      uint32_t t = static_cast<uint32_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      t = std::min<uint32_t>(t, static_cast<uint32_t>(mesh.triangle_count() - 1));
      double su = std::sqrt(rng.uniform());
      double v = rng.uniform();
      double b0 = 1.0 - su, b1 = su * (1.0 - v), b2 = su * v;
      Vec3 p = b0 * mesh.vertex(t, 0) + b1 * mesh.vertex(t, 1) + b2 * mesh.vertex(t, 2);
      double sigma = std::sqrt(rng.uniform(var_min, var_max));
      p += Vec3{sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
      p = min(max(p, cube.lo), cube.hi);
      points.push_back(p);
    }
  }
  for (size_t i = n_surface; i < n_total; ++i) {
    points.push_back({rng.uniform(cube.lo.x, cube.hi.x), rng.uniform(cube.lo.y, cube.hi.y),
                      rng.uniform(cube.lo.z, cube.hi.z)});
  }
  return points;
}

size_t OcclusionSampleSet::occluded_count(size_t point) const {
  size_t total = 0;
  for (size_t s = 0; s < n_sensors; ++s) total += sensor_bit(point, s);
  return total;
}

void OcclusionSampleSet::validate() const {
  if (global_label.size() != points.size() || sensor_bits.size() != points.size() * stride()) {
    throw std::runtime_error("sample set sizes inconsistent");
  }
  if (k < 1 || static_cast<size_t>(k) > n_sensors) {
    throw std::runtime_error("sample set k out of range");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    bool occluded = occluded_count(i) > n_sensors - static_cast<size_t>(k);
    if (occluded != (global_label[i] != 0)) {
      throw std::runtime_error("global label inconsistent with sensor bits");
    }
  }
}

OcclusionSampleSet label_set(const Bvh* bvh, const std::vector<Vec3>& points,
                             const std::vector<Vec3>& sensors, int k) {
  if (sensors.empty()) throw std::invalid_argument("sensor set is empty");
  if (k < 1 || k > static_cast<int>(sensors.size())) {
    throw std::invalid_argument("k must be in [1, N]");
  }
  OcclusionSampleSet set;
  set.points = points;
  set.n_sensors = sensors.size();
  set.k = k;
  set.global_label.assign(points.size(), 0);
  set.sensor_bits.assign(points.size() * set.stride(), 0);
  if (bvh == nullptr) return set;

  size_t stride = set.stride();
  size_t n = sensors.size();
  parallel_for(static_cast<int64_t>(points.size()), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      uint8_t* bits = &set.sensor_bits[i * stride];
      size_t occluded = 0;
      for (size_t s = 0; s < n; ++s) {
        if (local_occlusion(*bvh, points[i], sensors[s])) {
          bits[s / 8] |= static_cast<uint8_t>(1u << (s % 8));
          ++occluded;
        }
      }
      set.global_label[i] = occluded > n - static_cast<size_t>(k) ? 1 : 0;
    }
  });
  return set;
}

void save_samples(const OcclusionSampleSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sample file: " + path);
  size_t stride = set.stride();
  std::vector<char> record(12 + 1 + stride);
  for (size_t i = 0; i < set.count(); ++i) {
    float xyz[3] = {static_cast<float>(set.points[i].x), static_cast<float>(set.points[i].y),
                    static_cast<float>(set.points[i].z)};
    std::memcpy(record.data(), xyz, 12);
    record[12] = static_cast<char>(set.global_label[i]);
    std::memcpy(record.data() + 13, &set.sensor_bits[i * stride], stride);
    out.write(record.data(), static_cast<std::streamsize>(record.size()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);

  nlohmann::json j;
  j["count"] = set.count();
  j["sensors"] = set.n_sensors;
  j["k"] = set.k;
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot write sidecar: " + path + ".json");
  side << j.dump(2) << "\n";
}

OcclusionSampleSet load_samples(const std::string& path) {
  std::ifstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot open sidecar: " + path + ".json");
  nlohmann::json j = nlohmann::json::parse(side);

  OcclusionSampleSet set;
  size_t count = j.at("count").get<size_t>();
  set.n_sensors = j.at("sensors").get<size_t>();
  set.k = j.at("k").get<int>();
  size_t stride = set.stride();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open sample file: " + path);
  set.points.resize(count);
  set.global_label.resize(count);
  set.sensor_bits.resize(count * stride);
  std::vector<char> record(12 + 1 + stride);
  for (size_t i = 0; i < count; ++i) {
    in.read(record.data(), static_cast<std::streamsize>(record.size()));
    if (static_cast<size_t>(in.gcount()) != record.size()) {
      throw std::runtime_error("sample file truncated: " + path);
    }
    float xyz[3];
    std::memcpy(xyz, record.data(), 12);
    set.points[i] = {xyz[0], xyz[1], xyz[2]};
    set.global_label[i] = static_cast<uint8_t>(record[12]);
    std::memcpy(&set.sensor_bits[i * stride], record.data() + 13, stride);
  }
  set.validate();
  return set;
}

}  // namespace nlos
