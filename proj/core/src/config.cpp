#include "dav/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dav {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad real for '" + key + "': " + v);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_real(key, tok));
  return out;
}

std::vector<std::int64_t> parse_ints(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  std::vector<std::int64_t> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_int(key, tok));
  return out;
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0)) throw ConfigError("config: '" + key + "' must be positive");
}

}  // namespace

bool is_known_scenario(const std::string& name) {
  static const char* kScenarios[] = {"certify",  "exponents",    "periodic", "conjugacy",
                                     "foliation", "disintegrate", "mk",       "full-survey"};
  for (const char* s : kScenarios)
    if (name == s) return true;
  return false;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.source_text = text;

  std::istringstream is(text);
  std::string line;
  std::string section;
  ExperimentConfig::PerturbationSpec* pert = nullptr;

  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("config line " + std::to_string(lineno) +
                                             ": malformed section header");
      section = t.substr(1, t.size() - 2);
      static const char* kSections[] = {"map",       "perturbation", "run",  "certify",
                                        "exponents", "periodic",     "conjugacy",
                                        "foliation", "box",          "disintegrate", "mk"};
      bool known = false;
      for (const char* s : kSections) known = known || section == s;
      if (!known) throw ConfigError("config: unknown section [" + section + "]");
      if (section == "perturbation") {
        cfg.perturbations.emplace_back();
        pert = &cfg.perturbations.back();
      }
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");

    auto unknown = [&]() -> ConfigError {
      return ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
    };

    if (section == "map") {
      if (key == "matrix") {
        auto v = parse_ints(key, val);
        if (v.size() != 9) throw ConfigError("config: matrix needs nine integers, row-major");
        for (int i = 0; i < 9; ++i) cfg.matrix[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
      } else {
        throw unknown();
      }
    } else if (section == "perturbation") {
      if (!pert) throw ConfigError("config: key outside a [perturbation] block");
      if (key == "kind") {
        if (val != "shear" && val != "twist")
          throw ConfigError("config: perturbation kind must be shear or twist");
        pert->kind = val;
      } else if (key == "target") {
        pert->target = static_cast<int>(parse_int(key, val));
      } else if (key == "frequency") {
        auto v = parse_ints(key, val);
        if (v.size() != 3) throw ConfigError("config: frequency needs three integers");
        pert->frequency = Eigen::Vector3i(static_cast<int>(v[0]), static_cast<int>(v[1]),
                                          static_cast<int>(v[2]));
      } else if (key == "amplitude") {
        pert->amplitude = parse_real(key, val);
      } else if (key == "frame") {
        if (val == "axes" || val == "eigen") {
          pert->frame = val;
        } else {
          auto v = parse_reals(key, val);
          if (v.size() != 9)
            throw ConfigError("config: frame must be 'axes', 'eigen', or nine reals");
          pert->frame = "values";
          for (int i = 0; i < 9; ++i) pert->frame_values[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
        }
      } else if (key == "plane") {
        auto v = parse_ints(key, val);
        if (v.size() != 2) throw ConfigError("config: plane needs two indices");
        pert->plane_a = static_cast<int>(v[0]);
        pert->plane_b = static_cast<int>(v[1]);
      } else if (key == "center") {
        auto v = parse_reals(key, val);
        if (v.size() != 3) throw ConfigError("config: center needs three reals");
        pert->center = Vec3(v[0], v[1], v[2]);
      } else if (key == "radius") {
        pert->radius = parse_real(key, val);
        require_positive(key, pert->radius);
      } else if (key == "max_angle") {
        pert->max_angle = parse_real(key, val);
      } else {
        throw unknown();
      }
    } else if (section == "run") {
      if (key == "scenario") {
        if (!is_known_scenario(val)) throw ConfigError("config: unknown scenario '" + val + "'");
        cfg.scenario = val;
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, val));
      } else if (key == "out_dir") {
        cfg.out_dir = val;
      } else if (key == "workers") {
        cfg.workers = static_cast<int>(parse_int(key, val));
        if (cfg.workers < 0) throw ConfigError("config: workers must be >= 0");
      } else {
        throw unknown();
      }
    } else if (section == "certify") {
      if (key == "grid") {
        cfg.certify_grid = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.certify_grid);
      } else if (key == "iterates") {
        cfg.certify_iterates = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.certify_iterates);
      } else if (key == "aperture_stable") {
        cfg.apertures[0] = parse_real(key, val);
        require_positive(key, cfg.apertures[0]);
      } else if (key == "aperture_center") {
        cfg.apertures[1] = parse_real(key, val);
        require_positive(key, cfg.apertures[1]);
      } else if (key == "aperture_unstable") {
        cfg.apertures[2] = parse_real(key, val);
        require_positive(key, cfg.apertures[2]);
      } else {
        throw unknown();
      }
    } else if (section == "exponents") {
      if (key == "samples") {
        cfg.exp_samples = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.exp_samples);
      } else if (key == "orbit_length") {
        cfg.exp_orbit_length = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.exp_orbit_length);
      } else if (key == "burn_in") {
        cfg.exp_burn_in = static_cast<int>(parse_int(key, val));
        if (cfg.exp_burn_in < 0) throw ConfigError("config: burn_in must be >= 0");
      } else if (key == "zero_sum_tol") {
        cfg.exp_zero_sum_tol = parse_real(key, val);
        require_positive(key, cfg.exp_zero_sum_tol);
      } else {
        throw unknown();
      }
    } else if (section == "periodic") {
      if (key == "max_period") {
        cfg.periodic_max_period = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.periodic_max_period);
      } else if (key == "tolerance") {
        cfg.periodic_tolerance = parse_real(key, val);
        require_positive(key, cfg.periodic_tolerance);
      } else if (key == "count_cap") {
        cfg.periodic_count_cap = parse_int(key, val);
        require_positive(key, static_cast<double>(cfg.periodic_count_cap));
      } else {
        throw unknown();
      }
    } else if (section == "conjugacy") {
      if (key == "resolution") {
        cfg.conj_resolution = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.conj_resolution);
      } else if (key == "tolerance") {
        cfg.conj_tolerance = parse_real(key, val);
        require_positive(key, cfg.conj_tolerance);
      } else if (key == "max_iterations") {
        cfg.conj_max_iterations = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.conj_max_iterations);
      } else if (key == "interpolation_order") {
        cfg.conj_interpolation_order = static_cast<int>(parse_int(key, val));
        if (cfg.conj_interpolation_order != 1 && cfg.conj_interpolation_order != 3)
          throw ConfigError("config: interpolation_order must be 1 or 3");
      } else if (key == "residual_samples") {
        cfg.conj_residual_samples = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.conj_residual_samples);
      } else if (key == "fiber_samples") {
        cfg.conj_fiber_samples = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.conj_fiber_samples);
      } else if (key == "ratio_iterate") {
        cfg.conj_ratio_iterate = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.conj_ratio_iterate);
      } else if (key == "ratio_bound") {
        cfg.conj_ratio_bound = parse_real(key, val);
        if (!(cfg.conj_ratio_bound > 1)) throw ConfigError("config: ratio_bound must be > 1");
      } else {
        throw unknown();
      }
    } else if (section == "foliation") {
      if (key == "resolution") {
        cfg.fol_resolution = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.fol_resolution);
      } else if (key == "max_iterations") {
        cfg.fol_max_iterations = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.fol_max_iterations);
      } else if (key == "residual_samples") {
        cfg.fol_residual_samples = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.fol_residual_samples);
      } else if (key == "curve_step") {
        cfg.fol_curve_step = parse_real(key, val);
        require_positive(key, cfg.fol_curve_step);
      } else {
        throw unknown();
      }
    } else if (section == "box") {
      if (key == "base") {
        auto v = parse_reals(key, val);
        if (v.size() != 3) throw ConfigError("config: box base needs three reals");
        cfg.box_base = Vec3(v[0], v[1], v[2]);
      } else if (key == "half_a") {
        cfg.box_half_a = parse_real(key, val);
        require_positive(key, cfg.box_half_a);
      } else if (key == "half_b") {
        cfg.box_half_b = parse_real(key, val);
        require_positive(key, cfg.box_half_b);
      } else if (key == "leaf_half_length") {
        cfg.box_leaf_half_length = parse_real(key, val);
        require_positive(key, cfg.box_leaf_half_length);
      } else if (key == "cells_per_side") {
        cfg.box_cells_per_side = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.box_cells_per_side);
      } else {
        throw unknown();
      }
    } else if (section == "disintegrate") {
      if (key == "samples") {
        cfg.dis_samples = parse_int(key, val);
        require_positive(key, static_cast<double>(cfg.dis_samples));
      } else if (key == "bins") {
        cfg.dis_bins = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.dis_bins);
      } else if (key == "levels") {
        cfg.dis_levels = static_cast<int>(parse_int(key, val));
        if (cfg.dis_levels < 2) throw ConfigError("config: levels must be >= 2");
      } else if (key == "atom_threshold") {
        cfg.dis_atom_threshold = parse_real(key, val);
        require_positive(key, cfg.dis_atom_threshold);
      } else if (key == "min_cell_count") {
        cfg.dis_min_cell_count = static_cast<int>(parse_int(key, val));
        if (cfg.dis_min_cell_count < 0) throw ConfigError("config: min_cell_count must be >= 0");
      } else if (key == "concentration_windows") {
        cfg.dis_concentration_windows = parse_reals(key, val);
        for (double w : cfg.dis_concentration_windows) require_positive(key, w);
      } else if (key == "birkhoff_n") {
        cfg.dis_birkhoff_n = parse_int(key, val);
        require_positive(key, static_cast<double>(cfg.dis_birkhoff_n));
      } else if (key == "birkhoff_dictionary") {
        cfg.dis_birkhoff_dict = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.dis_birkhoff_dict);
      } else {
        throw unknown();
      }
    } else if (section == "mk") {
      if (key == "gamma0") {
        cfg.mk_gamma0 = parse_real(key, val);
        require_positive(key, cfg.mk_gamma0);
      } else if (key == "k_max") {
        cfg.mk_k_max = static_cast<int>(parse_int(key, val));
        if (cfg.mk_k_max < 0) throw ConfigError("config: k_max must be >= 0");
      } else if (key == "xi_per_side") {
        cfg.mk_xi_per_side = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.mk_xi_per_side);
      } else if (key == "xi_half_size") {
        cfg.mk_xi_half_size = parse_real(key, val);
        require_positive(key, cfg.mk_xi_half_size);
      } else if (key == "exponent_n") {
        cfg.mk_exponent_n = static_cast<int>(parse_int(key, val));
        require_positive(key, cfg.mk_exponent_n);
      } else if (key == "curve_step") {
        cfg.mk_curve_step = parse_real(key, val);
        require_positive(key, cfg.mk_curve_step);
      } else {
        throw unknown();
      }
    } else {
      throw ConfigError("config: key '" + key + "' before any section header");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

DAMap build_map(const ExperimentConfig& cfg) {
  LinearAnosov a = analyze_linear(IntMatrix3::from_rows(cfg.matrix));
  std::vector<Perturbation> perts;
  for (const auto& p : cfg.perturbations) {
    if (p.kind == "shear") {
      ShearPerturbation s;
      s.target = p.target;
      s.frequency = p.frequency;
      s.amplitude = p.amplitude;
      perts.push_back(s);
    } else if (p.kind == "twist") {
      TwistPerturbation t;
      if (p.frame == "axes") {
        t.frame = Mat3::Identity();
      } else if (p.frame == "eigen") {
        t.frame = a.eigenbasis();
      } else {
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) t.frame(i, j) = p.frame_values[static_cast<std::size_t>(3 * i + j)];
        for (int c = 0; c < 3; ++c) t.frame.col(c).normalize();
      }
      t.plane_a = p.plane_a;
      t.plane_b = p.plane_b;
      t.center = wrap(p.center);
      t.radius = p.radius;
      t.max_angle = p.max_angle;
      perts.push_back(t);
    } else {
      throw ConfigError("config: perturbation without a kind");
    }
  }
  return DAMap(std::move(a), std::move(perts));
}

}  // namespace dav
