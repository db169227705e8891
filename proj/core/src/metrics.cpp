#include "nlos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "nlos/rng.hpp"
#include "nlos/threading.hpp"

namespace nlos {

std::vector<Vec3> sample_mesh_points(const TriangleMesh& mesh, size_t n, uint64_t seed) {
  if (mesh.empty()) throw std::invalid_argument("empty mesh");
  std::vector<double> cumulative(mesh.triangle_count());
  double acc = 0.0;
  for (uint32_t t = 0; t < mesh.triangle_count(); ++t) {
    acc += mesh.area(t);
    cumulative[t] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("mesh has zero area");

  Rng rng(seed);
  std::vector<Vec3> points;
  points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    double pick = rng.uniform() * acc;
    uint32_t t = static_cast<uint32_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    t = std::min<uint32_t>(t, static_cast<uint32_t>(mesh.triangle_count() - 1));
    double su = std::sqrt(rng.uniform());
    double v = rng.uniform();
    double b0 = 1.0 - su, b1 = su * (1.0 - v), b2 = su * v;
    points.push_back(b0 * mesh.vertex(t, 0) + b1 * mesh.vertex(t, 1) + b2 * mesh.vertex(t, 2));
  }
  return points;
}

namespace {

// Median-split kd-tree for nearest-neighbor squared distances.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : points_(points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * points.size() / kLeaf + 2);
    if (!points.empty()) build(0, static_cast<uint32_t>(points.size()));
  }

  double nearest_sq(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(0, q, best);
    return best;
  }

 private:
  static constexpr uint32_t kLeaf = 8;
  struct Node {
    Aabb box;
    uint32_t lo = 0, hi = 0;    // leaf range in order_
    uint32_t right = 0;         // 0 = leaf
  };

  const std::vector<Vec3>& points_;
  std::vector<uint32_t> order_;
  std::vector<Node> nodes_;

  uint32_t build(uint32_t lo, uint32_t hi) {
    uint32_t index = static_cast<uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    for (uint32_t i = lo; i < hi; ++i) box.grow(points_[order_[i]]);
    nodes_[index].box = box;
    if (hi - lo <= kLeaf) {
      nodes_[index].lo = lo;
      nodes_[index].hi = hi;
      return index;
    }
    int axis = box.longest_axis();
    uint32_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](uint32_t a, uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid);
    nodes_[index].right = build(mid, hi);
    return index;
  }

  static double box_dist_sq(const Aabb& box, const Vec3& q) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
      double lo = box.lo[a], hi = box.hi[a], v = q[a];
      double out = v < lo ? lo - v : (v > hi ? v - hi : 0.0);
      d += out * out;
    }
    return d;
  }

  void search(uint32_t index, const Vec3& q, double& best) const {
    const Node& node = nodes_[index];
    if (box_dist_sq(node.box, q) >= best) return;
    if (node.right == 0) {
      for (uint32_t i = node.lo; i < node.hi; ++i) {
        best = std::min(best, length_sq(points_[order_[i]] - q));
      }
      return;
    }
    double dl = box_dist_sq(nodes_[index + 1].box, q);
    double dr = box_dist_sq(nodes_[node.right].box, q);
    if (dl <= dr) {
      search(index + 1, q, best);
      if (dr < best) search(node.right, q, best);
    } else {
      search(node.right, q, best);
      if (dl < best) search(index + 1, q, best);
    }
  }
};

double mean_nearest_sq(const std::vector<Vec3>& from, const KdTree& to) {
  std::vector<double> partial(from.size());
  parallel_for(static_cast<int64_t>(from.size()), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) partial[i] = to.nearest_sq(from[i]);
  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const TriangleMesh& mesh_a, const TriangleMesh& mesh_b, size_t n_samples,
               uint64_t seed) {
  if (mesh_a.empty() || mesh_b.empty()) throw std::invalid_argument("empty mesh");
  if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
  auto pa = sample_mesh_points(mesh_a, n_samples, seed);
  auto pb = sample_mesh_points(mesh_b, n_samples, seed);
  KdTree ta(pa), tb(pb);
  return 0.5 * (mean_nearest_sq(pa, tb) + mean_nearest_sq(pb, ta));
}

double label_iou(const std::vector<uint8_t>& pred_labels, const std::vector<uint8_t>& gt_labels) {
  if (pred_labels.size() != gt_labels.size()) {
    throw std::invalid_argument("label vectors differ in length");
  }
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < pred_labels.size(); ++i) {
    bool p = pred_labels[i] != 0, g = gt_labels[i] != 0;
    inter += p && g;
    uni += p || g;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double fscore(const TriangleMesh& mesh_pred, const TriangleMesh& mesh_gt, double tau,
              size_t n_samples, uint64_t seed) {
  if (mesh_pred.empty() || mesh_gt.empty()) throw std::invalid_argument("empty mesh");
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  auto pp = sample_mesh_points(mesh_pred, n_samples, seed);
  auto pg = sample_mesh_points(mesh_gt, n_samples, seed);
  KdTree tp(pp), tg(pg);
  double tau_sq = tau * tau;

  auto fraction_within = [&](const std::vector<Vec3>& from, const KdTree& to) {
    std::vector<uint8_t> hit(from.size());
    parallel_for(static_cast<int64_t>(from.size()), [&](int64_t lo, int64_t hi) {
      for (int64_t i = lo; i < hi; ++i) hit[i] = to.nearest_sq(from[i]) <= tau_sq ? 1 : 0;
    });
    size_t count = 0;
    for (uint8_t h : hit) count += h;
    return static_cast<double>(count) / static_cast<double>(from.size());
  };

  double precision = fraction_within(pp, tg);
  double recall = fraction_within(pg, tp);
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["chamfer"] = chamfer_raw;
  j["chamfer_x1e3"] = chamfer_x1e3;
  j["chamfer_convention"] = "symmetric mean squared nearest-neighbor distance";
  j["fscore"] = fscore;
  j["tau"] = tau;
  if (iou >= 0.0) j["iou"] = iou;
  j["n_samples"] = n_samples;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

EvalReport evaluate_meshes(const TriangleMesh& pred, const TriangleMesh& gt, double tau,
                           size_t n_samples, uint64_t seed) {
  EvalReport report;
  report.chamfer_raw = chamfer(pred, gt, n_samples, seed);
  report.chamfer_x1e3 = report.chamfer_raw * 1e3;
  report.fscore = fscore(pred, gt, tau, n_samples, seed);
  report.tau = tau;
  report.n_samples = n_samples;
  report.seed = seed;
  return report;
}

}  // namespace nlos
