#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dav/damap.hpp"

namespace dav {

/// Experiment configuration parsed from the flat key = value text format
/// (sections in brackets, '#' comments, decimal strings for reals).
/// Unknown sections or keys are rejected; numeric parameters are validated
/// at load.
struct ExperimentConfig {
  // [map]
  std::array<std::int64_t, 9> matrix{1, 0, 0, 0, 1, 0, 0, 0, 1};

  // [perturbation] (repeatable)
  struct PerturbationSpec {
    std::string kind;  // "shear" | "twist"
    // shear
    int target = 0;
    Eigen::Vector3i frequency = Eigen::Vector3i::Zero();
    double amplitude = 0.0;
    // twist
    std::string frame = "axes";  // "axes" | "eigen" | nine numbers
    std::array<double, 9> frame_values{1, 0, 0, 0, 1, 0, 0, 0, 1};
    int plane_a = 0, plane_b = 1;
    Vec3 center = Vec3(0.5, 0.5, 0.5);
    double radius = 0.2;
    double max_angle = 0.0;
  };
  std::vector<PerturbationSpec> perturbations;

  // [run]
  std::string scenario = "certify";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 0;  // 0 = default

  // [certify]
  int certify_grid = 12;
  int certify_iterates = 8;
  std::array<double, 3> apertures{0.3, 0.3, 0.3};

  // [exponents]
  int exp_samples = 1000;
  int exp_orbit_length = 10000;
  int exp_burn_in = 100;
  double exp_zero_sum_tol = 1e-3;

  // [periodic]
  int periodic_max_period = 4;
  double periodic_tolerance = 1e-6;
  std::int64_t periodic_count_cap = 20000;

  // [conjugacy]
  int conj_resolution = 64;
  double conj_tolerance = 1e-12;
  int conj_max_iterations = 500;
  int conj_interpolation_order = 1;
  int conj_residual_samples = 100000;
  int conj_fiber_samples = 20000;
  int conj_ratio_iterate = 5;
  double conj_ratio_bound = 2.0;

  // [foliation]
  int fol_resolution = 48;
  int fol_max_iterations = 400;
  int fol_residual_samples = 100000;
  double fol_curve_step = 2e-3;

  // [box]
  Vec3 box_base = Vec3(0.25, 0.25, 0.25);
  double box_half_a = 0.1;
  double box_half_b = 0.1;
  double box_leaf_half_length = 0.2;
  int box_cells_per_side = 5;

  // [disintegrate]
  std::int64_t dis_samples = 1000000;
  int dis_bins = 8;
  int dis_levels = 3;
  double dis_atom_threshold = 0.5;
  int dis_min_cell_count = 100;
  std::vector<double> dis_concentration_windows{0.08, 0.16, 0.24, 0.32, 0.4};
  std::int64_t dis_birkhoff_n = 100000;
  int dis_birkhoff_dict = 20;

  // [mk]
  double mk_gamma0 = 0.4;
  int mk_k_max = 6;
  int mk_xi_per_side = 1;
  double mk_xi_half_size = 0.05;
  int mk_exponent_n = 1000;
  double mk_curve_step = 1e-3;

  /// Raw text the config was parsed from (echoed into manifests).
  std::string source_text;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Materialize the map described by the config (validates the matrix and
/// every perturbation).
DAMap build_map(const ExperimentConfig& cfg);

bool is_known_scenario(const std::string& name);

}  // namespace dav
