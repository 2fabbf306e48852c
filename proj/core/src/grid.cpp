#include "dav/grid.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dav/errors.hpp"

namespace dav {

GridField::GridField(int resolution, int components)
    : res_(resolution),
      comps_(components),
      data_(static_cast<std::size_t>(resolution) * resolution * resolution * components, 0.0) {
  if (resolution < 2) throw Error("GridField: resolution must be >= 2");
}

double& GridField::at(int i, int j, int k, int c) {
  return data_[((static_cast<std::size_t>(i) * res_ + j) * res_ + k) * comps_ + c];
}

double GridField::at(int i, int j, int k, int c) const {
  return data_[((static_cast<std::size_t>(i) * res_ + j) * res_ + k) * comps_ + c];
}

namespace {

inline int wrap_index(int i, int res) {
  i %= res;
  return i < 0 ? i + res : i;
}

// Catmull-Rom weights for fractional position t in [0,1)
inline void catmull_rom(double t, double w[4]) {
  double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

}  // namespace

void GridField::sample(const TorusPoint& p, int order, double* out) const {
  const int res = res_;
  double gx = p[0] * res, gy = p[1] * res, gz = p[2] * res;
  int ix = static_cast<int>(std::floor(gx));
  int iy = static_cast<int>(std::floor(gy));
  int iz = static_cast<int>(std::floor(gz));
  double fx = gx - ix, fy = gy - iy, fz = gz - iz;

  for (int c = 0; c < comps_; ++c) out[c] = 0.0;

  if (order == 1) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int d = 0; d < 2; ++d) {
          double w = (a ? fx : 1 - fx) * (b ? fy : 1 - fy) * (d ? fz : 1 - fz);
          int i = wrap_index(ix + a, res), j = wrap_index(iy + b, res),
              k = wrap_index(iz + d, res);
          const double* node = &data_[((static_cast<std::size_t>(i) * res + j) * res + k) * comps_];
          for (int c = 0; c < comps_; ++c) out[c] += w * node[c];
        }
    return;
  }
  if (order == 3) {
    double wx[4], wy[4], wz[4];
    catmull_rom(fx, wx);
    catmull_rom(fy, wy);
    catmull_rom(fz, wz);
    for (int a = 0; a < 4; ++a) {
      int i = wrap_index(ix - 1 + a, res);
      for (int b = 0; b < 4; ++b) {
        int j = wrap_index(iy - 1 + b, res);
        double wab = wx[a] * wy[b];
        for (int d = 0; d < 4; ++d) {
          int k = wrap_index(iz - 1 + d, res);
          double w = wab * wz[d];
          const double* node = &data_[((static_cast<std::size_t>(i) * res + j) * res + k) * comps_];
          for (int c = 0; c < comps_; ++c) out[c] += w * node[c];
        }
      }
    }
    return;
  }
  throw Error("GridField::sample: interpolation order must be 1 or 3");
}

Vec3 GridField::sample_vec3(const TorusPoint& p, int order) const {
  if (comps_ != 3) throw Error("sample_vec3: field does not have 3 components");
  Vec3 v;
  sample(p, order, v.data());
  return v;
}

// --- binary IO ---------------------------------------------------------------

namespace {

void write_le_double(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double read_le_double(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field_file(const std::filesystem::path& path, const FieldFile& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "DAVFIELD 1\n";
  os << "components " << f.components << "\n";
  os << "resolution " << f.resolution << " " << f.resolution << " " << f.resolution << "\n";
  os << "basis";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) os << " " << fmt17(f.basis(i, j));
  os << "\n";
  for (const auto& [k, v] : f.metadata) os << "meta " << k << " " << v << "\n";
  os << "end\n";
  const std::size_t n = static_cast<std::size_t>(f.resolution) * f.resolution * f.resolution;
  if (f.grids.size() != static_cast<std::size_t>(f.components))
    throw IoError("write_field_file: grid count does not match components");
  for (const auto& g : f.grids) {
    if (g.size() != n) throw IoError("write_field_file: grid size mismatch");
    for (double v : g) write_le_double(os, v);
  }
  if (!os) throw IoError("write failed: " + path.string());
}

FieldFile read_field_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  FieldFile f;
  std::string line;
  if (!std::getline(is, line) || line != "DAVFIELD 1") throw IoError("bad field file magic");
  while (std::getline(is, line)) {
    if (line == "end") break;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "components") {
      ss >> f.components;
    } else if (key == "resolution") {
      int r1, r2, r3;
      ss >> r1 >> r2 >> r3;
      if (r1 != r2 || r2 != r3) throw IoError("field file: non-cubic grid");
      f.resolution = r1;
    } else if (key == "basis") {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ss >> f.basis(i, j);
    } else if (key == "meta") {
      std::string k;
      ss >> k;
      std::string v;
      std::getline(ss, v);
      if (!v.empty() && v.front() == ' ') v.erase(0, 1);
      f.metadata[k] = v;
    } else {
      throw IoError("field file: unknown header key '" + key + "'");
    }
  }
  if (f.resolution < 2 || f.components < 1) throw IoError("field file: missing header fields");
  const std::size_t n = static_cast<std::size_t>(f.resolution) * f.resolution * f.resolution;
  f.grids.assign(static_cast<std::size_t>(f.components), {});
  for (auto& g : f.grids) {
    g.resize(n);
    for (auto& v : g) v = read_le_double(is);
  }
  if (!is) throw IoError("field file truncated: " + path.string());
  return f;
}

std::vector<std::vector<double>> split_components(const GridField& g) {
  const std::size_t n =
      static_cast<std::size_t>(g.resolution()) * g.resolution() * g.resolution();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(g.components()),
                                       std::vector<double>(n));
  for (std::size_t node = 0; node < n; ++node)
    for (int c = 0; c < g.components(); ++c)
      out[static_cast<std::size_t>(c)][node] = g.data()[node * g.components() + static_cast<std::size_t>(c)];
  return out;
}

}  // namespace dav
