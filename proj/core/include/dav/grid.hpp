#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dav/torus.hpp"

namespace dav {

/// Periodic scalar/vector field sampled on a uniform res^3 grid over T^3,
/// node (i,j,k) at (i,j,k)/res. Supports trilinear (order 1) and tricubic
/// Catmull-Rom (order 3) interpolation with periodic wrap.
class GridField {
 public:
  GridField() = default;
  GridField(int resolution, int components);

  int resolution() const { return res_; }
  int components() const { return comps_; }

  double& at(int i, int j, int k, int c);
  double at(int i, int j, int k, int c) const;

  /// Interpolate all components at a torus point.
  void sample(const TorusPoint& p, int order, double* out) const;
  Vec3 sample_vec3(const TorusPoint& p, int order) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int res_ = 0;
  int comps_ = 0;
  std::vector<double> data_;  // layout: ((i*res + j)*res + k)*comps + c
};

/// Flat binary persistence: a short text header (magic, resolution, a 3x3
/// basis matrix, free-form metadata), then one row-major scalar grid of
/// little-endian 8-byte floats per component.
struct FieldFile {
  int resolution = 0;
  int components = 0;
  Mat3 basis = Mat3::Identity();
  std::map<std::string, std::string> metadata;
  std::vector<std::vector<double>> grids;  // one per component, row-major
};

void write_field_file(const std::filesystem::path& path, const FieldFile& f);
FieldFile read_field_file(const std::filesystem::path& path);

/// Split an interleaved GridField into per-component row-major grids.
std::vector<std::vector<double>> split_components(const GridField& g);

}  // namespace dav
