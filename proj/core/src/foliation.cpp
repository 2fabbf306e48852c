#include "dav/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "dav/parallel.hpp"
#include "dav/rng.hpp"

namespace dav {

namespace {

// angle between directions (orientation-blind), accurate near zero
double direction_angle(const Vec3& a, const Vec3& b) {
  Vec3 an = a.normalized(), bn = b.normalized();
  return std::atan2(an.cross(bn).norm(), std::abs(an.dot(bn)));
}

struct NodeMaps {
  std::vector<TorusPoint> pre;      // f^{-1}(node)
  std::vector<Mat3> j_pre;          // Df at f^{-1}(node)
  std::vector<TorusPoint> post;     // f(node)
  std::vector<Mat3> j_inv;          // Df(node)^{-1}
};

NodeMaps node_maps(const DAMap& f, int res, int workers) {
  const std::size_t nodes = static_cast<std::size_t>(res) * res * res;
  NodeMaps nm;
  nm.pre.resize(nodes);
  nm.j_pre.resize(nodes);
  nm.post.resize(nodes);
  nm.j_inv.resize(nodes);
  parallel_for(nodes, workers, [&](std::size_t idx) {
    int i = static_cast<int>(idx / (static_cast<std::size_t>(res) * res));
    int j = static_cast<int>((idx / res) % static_cast<std::size_t>(res));
    int k = static_cast<int>(idx % static_cast<std::size_t>(res));
    TorusPoint x = wrap(Vec3(static_cast<double>(i) / res, static_cast<double>(j) / res,
                             static_cast<double>(k) / res));
    TorusPoint pre = f.invert(x);
    nm.pre[idx] = pre;
    nm.j_pre[idx] = f.derivative(pre);
    nm.post[idx] = f.apply(x);
    nm.j_inv[idx] = f.derivative(x).inverse();
  });
  return nm;
}

// Generic sign-coherent vector-field sweep until the max angle change drops
// below tol. transport(idx, sample) must return the new direction at node
// idx given a function sampling the previous field.
template <typename Transport>
std::pair<int, double> iterate_field(GridField& g, const Vec3& reference, int max_iterations,
                                     double angle_tol, int workers, Transport transport) {
  const int res = g.resolution();
  const std::size_t nodes = static_cast<std::size_t>(res) * res * res;
  GridField next(res, 3);
  std::mutex merge_mutex;
  int it = 0;
  double change = 0.0;
  for (; it < max_iterations; ++it) {
    change = 0.0;
    parallel_chunks(nodes, workers, [&](std::size_t begin, std::size_t end) {
      double local = 0.0;
      for (std::size_t idx = begin; idx < end; ++idx) {
        Vec3 v = transport(idx);
        v.normalize();
        if (v.dot(reference) < 0) v = -v;
        Vec3 old(g.data()[idx * 3], g.data()[idx * 3 + 1], g.data()[idx * 3 + 2]);
        // chordal distance of unit vectors ~ angle, exact down to machine eps
        local = std::max(local, (v - old).norm());
        next.data()[idx * 3] = v[0];
        next.data()[idx * 3 + 1] = v[1];
        next.data()[idx * 3 + 2] = v[2];
      }
      std::lock_guard<std::mutex> lock(merge_mutex);
      change = std::max(change, local);
    });
    std::swap(g.data(), next.data());
    if (change <= angle_tol) return {it + 1, change};
  }
  throw NoConvergence("bundle iteration: no convergence after " +
                      std::to_string(max_iterations) + " sweeps (last change " +
                      std::to_string(change) + ")");
}

void fill_constant(GridField& g, const Vec3& v) {
  const int res = g.resolution();
  const std::size_t nodes = static_cast<std::size_t>(res) * res * res;
  for (std::size_t idx = 0; idx < nodes; ++idx) {
    g.data()[idx * 3] = v[0];
    g.data()[idx * 3 + 1] = v[1];
    g.data()[idx * 3 + 2] = v[2];
  }
}

Vec3 sample_dir(const GridField& g, const TorusPoint& p, const Vec3& reference) {
  Vec3 v = g.sample_vec3(p, 1);
  double n = v.norm();
  if (n < 1e-12) throw Error("bundle field: degenerate interpolated vector");
  v /= n;
  if (v.dot(reference) < 0) v = -v;
  return v;
}

}  // namespace

Vec3 BundleField::direction(const TorusPoint& x) const {
  return sample_dir(field, x, reference_direction);
}

const BundleField& FoliationBundles::by_label(BundleLabel l) const {
  switch (l) {
    case BundleLabel::StrongStable: return strong;
    case BundleLabel::Center: return center;
    default: return unstable;
  }
}

BundleField compute_bundle(const DAMap& f, BundleLabel label, int resolution,
                           int max_iterations, double angle_tol, int workers) {
  const LinearAnosov& A = f.linear();
  const auto names = bundle_names(A.splitting);
  const int res = resolution;

  BundleField out;
  out.label = label;
  out.resolution = res;
  out.field = GridField(res, 3);

  int eig_index = label == BundleLabel::StrongStable ? 0 : (label == BundleLabel::Center ? 1 : 2);
  out.label_name = names[static_cast<std::size_t>(eig_index)];
  out.reference_direction = A.eigenvectors[static_cast<std::size_t>(eig_index)];
  fill_constant(out.field, out.reference_direction);

  if (f.is_linear()) {
    // constant eigenvector fields are exactly invariant
    out.iterations = 0;
    out.convergence_angle = 0.0;
    return out;
  }

  NodeMaps nm = node_maps(f, res, workers);

  if (label == BundleLabel::Unstable) {
    // dominant forward bundle: pull the base point back, push the vector forward
    auto [iters, change] = iterate_field(
        out.field, out.reference_direction, max_iterations, angle_tol, workers,
        [&](std::size_t idx) {
          Vec3 v = sample_dir(out.field, nm.pre[idx], out.reference_direction);
          return Vec3(nm.j_pre[idx] * v);
        });
    out.iterations = iters;
    out.convergence_angle = change;
    return out;
  }

  if (label == BundleLabel::StrongStable) {
    // dominant backward bundle
    auto [iters, change] = iterate_field(
        out.field, out.reference_direction, max_iterations, angle_tol, workers,
        [&](std::size_t idx) {
          Vec3 v = sample_dir(out.field, nm.post[idx], out.reference_direction);
          return Vec3(nm.j_inv[idx] * v);
        });
    out.iterations = iters;
    out.convergence_angle = change;
    return out;
  }

  // Center: track the invariant 2-plane containing it, then iterate inside
  // the plane with the plane-orthogonal drift deflated every step.
  const bool contracting_center = A.splitting == SplittingCase::TwoContracting;

  // plane normal transforms by the inverse transpose cocycle
  GridField normal(res, 3);
  Vec3 n0 = contracting_center
                ? Vec3(A.eigenvectors[1].cross(A.eigenvectors[2]).normalized())   // cu-plane
                : Vec3(A.eigenvectors[0].cross(A.eigenvectors[1]).normalized());  // cs-plane
  fill_constant(normal, n0);
  int normal_iters = 0;
  if (contracting_center) {
    // cu-plane is forward invariant
    auto [iters, change] = iterate_field(normal, n0, max_iterations, angle_tol, workers,
                                         [&](std::size_t idx) {
                                           Vec3 v = sample_dir(normal, nm.pre[idx], n0);
                                           return Vec3(nm.j_pre[idx].inverse().transpose() * v);
                                         });
    normal_iters = iters;
    (void)change;
  } else {
    // cs-plane is backward invariant
    auto [iters, change] = iterate_field(normal, n0, max_iterations, angle_tol, workers,
                                         [&](std::size_t idx) {
                                           Vec3 v = sample_dir(normal, nm.post[idx], n0);
                                           return Vec3(nm.j_inv[idx].inverse().transpose() * v);
                                         });
    normal_iters = iters;
    (void)change;
  }

  auto project_to_plane = [&](std::size_t idx, const Vec3& v) {
    Vec3 n(normal.data()[idx * 3], normal.data()[idx * 3 + 1], normal.data()[idx * 3 + 2]);
    return Vec3(v - n * (n.dot(v) / n.squaredNorm()));
  };

  if (contracting_center) {
    // inside the cu-plane the center dominates under f^{-1}
    auto [iters, change] = iterate_field(
        out.field, out.reference_direction, max_iterations, angle_tol, workers,
        [&](std::size_t idx) {
          Vec3 v = sample_dir(out.field, nm.post[idx], out.reference_direction);
          return project_to_plane(idx, nm.j_inv[idx] * v);
        });
    out.iterations = normal_iters + iters;
    out.convergence_angle = change;
  } else {
    // inside the cs-plane the center dominates under f
    auto [iters, change] = iterate_field(
        out.field, out.reference_direction, max_iterations, angle_tol, workers,
        [&](std::size_t idx) {
          Vec3 v = sample_dir(out.field, nm.pre[idx], out.reference_direction);
          return project_to_plane(idx, nm.j_pre[idx] * v);
        });
    out.iterations = normal_iters + iters;
    out.convergence_angle = change;
  }
  return out;
}

FoliationBundles compute_bundles(const DAMap& f, int resolution, int max_iterations,
                                 double angle_tol, int workers) {
  FoliationBundles b{
      compute_bundle(f, BundleLabel::StrongStable, resolution, max_iterations, angle_tol, workers),
      compute_bundle(f, BundleLabel::Center, resolution, max_iterations, angle_tol, workers),
      compute_bundle(f, BundleLabel::Unstable, resolution, max_iterations, angle_tol, workers)};
  return b;
}

double measure_invariance(const DAMap& f, const BundleField& field, int samples,
                          std::uint64_t seed, int workers) {
  std::vector<double> angles(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
    CounterRng rng(seed, "bundle_invariance", i);
    TorusPoint x = rng.torus_point();
    Vec3 v = field.direction(x);
    Vec3 w = f.derivative(x) * v;
    Vec3 e = field.direction(f.apply(x));
    angles[i] = direction_angle(w, e);
  });
  double sup = 0.0;
  for (double a : angles) sup = std::max(sup, a);
  return sup;
}

// --- curves ------------------------------------------------------------------

Vec3 CenterCurve::at(double s) const {
  if (points.empty()) throw Error("CenterCurve::at: empty curve");
  if (s <= arclength.front()) return points.front();
  if (s >= arclength.back()) return points.back();
  auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
  std::size_t hi = static_cast<std::size_t>(it - arclength.begin());
  std::size_t lo = hi - 1;
  double t = (s - arclength[lo]) / (arclength[hi] - arclength[lo]);
  return points[lo] + t * (points[hi] - points[lo]);
}

namespace {

// RK4 advance of x' = dir(x) with sign continuation against prev_dir.
Vec3 rk4_step(const BundleField& field, const Vec3& x, double h, Vec3& prev_dir) {
  auto dir_at = [&](const Vec3& p) {
    Vec3 d = field.direction(wrap(p));
    if (d.dot(prev_dir) < 0) d = -d;
    if (std::abs(d.dot(prev_dir)) < 0.2) {
      throw SignFlip("curve integration: field orientation ambiguity");
    }
    return d;
  };
  Vec3 k1 = dir_at(x);
  Vec3 k2 = dir_at(x + 0.5 * h * k1);
  Vec3 k3 = dir_at(x + 0.5 * h * k2);
  Vec3 k4 = dir_at(x + h * k3);
  Vec3 step = (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  prev_dir = dir_at(x + step);
  return x + step;
}

}  // namespace

CenterCurve integrate_center_curve(const BundleField& field, const TorusPoint& x0,
                                   double half_length, double step) {
  if (!(half_length > 0) || !(step > 0) || step > half_length)
    throw Error("integrate_center_curve: bad arclength parameters");
  int n = static_cast<int>(std::ceil(half_length / step));
  double h = half_length / n;

  std::vector<Vec3> fwd, bwd;
  fwd.reserve(static_cast<std::size_t>(n) + 1);
  bwd.reserve(static_cast<std::size_t>(n) + 1);

  Vec3 start = x0.lift();
  {
    Vec3 dir = field.direction(x0);
    Vec3 x = start;
    for (int i = 0; i < n; ++i) {
      x = rk4_step(field, x, h, dir);
      fwd.push_back(x);
    }
  }
  {
    Vec3 dir = -field.direction(x0);
    Vec3 x = start;
    for (int i = 0; i < n; ++i) {
      x = rk4_step(field, x, h, dir);
      bwd.push_back(x);
    }
  }

  CenterCurve c;
  c.base = x0;
  c.step = h;
  c.points.reserve(2 * static_cast<std::size_t>(n) + 1);
  for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) c.points.push_back(*it);
  c.points.push_back(start);
  for (const auto& p : fwd) c.points.push_back(p);
  c.base_index = n;
  c.arclength.resize(c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i)
    c.arclength[i] = (static_cast<double>(i) - n) * h;
  return c;
}

CenterCurve integrate_curve_one_sided(const BundleField& field, const TorusPoint& x0,
                                      double length, double step, bool forward) {
  if (!(length > 0) || !(step > 0) || step > length)
    throw Error("integrate_curve_one_sided: bad arclength parameters");
  int n = static_cast<int>(std::ceil(length / step));
  double h = length / n;
  CenterCurve c;
  c.base = x0;
  c.step = h;
  c.base_index = 0;
  c.points.push_back(x0.lift());
  Vec3 dir = forward ? field.direction(x0) : Vec3(-field.direction(x0));
  Vec3 x = x0.lift();
  for (int i = 0; i < n; ++i) {
    x = rk4_step(field, x, h, dir);
    c.points.push_back(x);
  }
  c.arclength.resize(c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) c.arclength[i] = static_cast<double>(i) * h;
  return c;
}

void save_bundle_field(const std::filesystem::path& path, const BundleField& b) {
  FieldFile ff;
  ff.resolution = b.resolution;
  ff.components = 3;
  ff.basis = Mat3::Identity();
  ff.metadata["kind"] = "bundle";
  ff.metadata["label"] = b.label_name;
  ff.metadata["iterations"] = std::to_string(b.iterations);
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", b.invariance_residual);
    ff.metadata["invariance_residual"] = buf;
  }
  ff.grids = split_components(b.field);
  write_field_file(path, ff);

  std::ofstream side(path.string() + ".txt");
  if (!side) throw IoError("cannot write sidecar for " + path.string());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "label %s\niterations %d\ninvariance_residual %.17g\n",
                b.label_name.c_str(), b.iterations, b.invariance_residual);
  side << buf;
}

}  // namespace dav
