#include "dav/runner.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dav/cocycle.hpp"
#include "dav/conjugacy.hpp"
#include "dav/disintegration.hpp"
#include "dav/holonomy.hpp"
#include "dav/parallel.hpp"
#include "dav/periodic.hpp"
#include "dav/rng.hpp"
#include "dav/sha256.hpp"

namespace dav {

namespace {

using nlohmann::json;

class RunContext {
 public:
  RunContext(std::filesystem::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string());
  }

  std::ostream& log() { return log_; }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw IoError("cannot write " + (dir_ / name).string());
    os << content;
    if (!os) throw IoError("write failed: " + (dir_ / name).string());
    files_.push_back(name);
  }

  void note_file(const std::string& name) { files_.push_back(name); }

  const std::filesystem::path& dir() const { return dir_; }

  template <typename Fn>
  void stage(const std::string& name, Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    log_ << "[stage] " << name << "...\n";
    fn();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings_.push_back({name, secs});
    log_ << "[stage] " << name << " done in " << secs << " s\n";
  }

  json manifest(const ExperimentConfig& cfg, const std::string& scenario,
                std::uint64_t seed) const {
    json m;
    m["tool_version"] = kToolVersion;
    m["scenario"] = scenario;
    m["seed"] = seed;
    m["config"] = cfg.source_text;
    json tl = json::array();
    for (const auto& [n, s] : timings_) tl.push_back({{"stage", n}, {"seconds", s}});
    m["timings"] = tl;
    json fl = json::array();
    for (const auto& f : files_) {
      auto p = dir_ / f;
      fl.push_back({{"name", f},
                    {"bytes", std::filesystem::file_size(p)},
                    {"sha256", sha256_file_hex(p)}});
    }
    m["files"] = fl;
    return m;
  }

 private:
  std::filesystem::path dir_;
  std::ostream& log_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, double>> timings_;
};

json certificate_json(const PHCertificate& c) {
  json j;
  j["verified"] = c.verified;
  j["splitting"] = splitting_name(c.splitting);
  j["iterates"] = c.iterates;
  j["grid_resolution"] = c.grid_resolution;
  j["apertures"] = {c.apertures[0], c.apertures[1], c.apertures[2]};
  j["rate_strong_max"] = c.rate_strong_max;
  j["rate_center_min"] = c.rate_center_min;
  j["rate_center_max"] = c.rate_center_max;
  j["rate_unstable_min"] = c.rate_unstable_min;
  if (c.first_violation) {
    j["first_violation"] = {(*c.first_violation)[0], (*c.first_violation)[1],
                            (*c.first_violation)[2]};
    j["violation_reason"] = c.violation_reason;
  }
  return j;
}

std::string exponents_csv(const ExponentEstimate& e) {
  std::string out =
      "seed,samples,n,mean_low,mean_mid,mean_high,stderr_low,stderr_mid,stderr_high,"
      "zero_sum_residual\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%llu,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                static_cast<unsigned long long>(e.seed), e.samples, e.orbit_length, e.mean.low,
                e.mean.mid, e.mean.high, e.standard_error[0], e.standard_error[1],
                e.standard_error[2], e.mean.sum());
  out += buf;
  return out;
}

json inequality_json(const InequalityReport& r, const ExponentEstimate& e) {
  json j;
  j["mean_low"] = e.mean.low;
  j["mean_mid"] = e.mean.mid;
  j["mean_high"] = e.mean.high;
  j["stderr_low"] = e.standard_error[0];
  j["stderr_mid"] = e.standard_error[1];
  j["stderr_high"] = e.standard_error[2];
  j["lambda_ss_linear"] = r.lambda_ss_linear;
  j["lambda_ws_linear"] = r.lambda_ws_linear;
  j["lambda_u_linear"] = r.lambda_u_linear;
  j["unstable_ok"] = r.unstable_ok;
  j["strong_stable_ok"] = r.strong_stable_ok;
  if (r.weak_stable_ok) j["weak_stable_ok"] = *r.weak_stable_ok;
  j["zero_sum_residual"] = r.zero_sum_residual;
  j["zero_sum_tolerance"] = r.zero_sum_tolerance;
  j["zero_sum_ok"] = r.zero_sum_ok;
  return j;
}

std::string periodic_csv(const ConstancyReport& r) {
  std::string out = "period,rep_x,rep_y,rep_z,lambda_low,lambda_mid,lambda_high,residual\n";
  char buf[512];
  for (const auto& d : r.orbits) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  d.orbit.minimal_period, d.orbit.representative[0], d.orbit.representative[1],
                  d.orbit.representative[2], d.exponents[0], d.exponents[1], d.exponents[2],
                  d.orbit.residual);
    out += buf;
  }
  return out;
}

json constancy_json(const ConstancyReport& r) {
  json j;
  j["max_period"] = r.max_period;
  j["tolerance"] = r.tolerance;
  j["orbit_count"] = r.orbits.size();
  j["spread_low"] = r.spreads[0];
  j["spread_mid"] = r.spreads[1];
  j["spread_high"] = r.spreads[2];
  j["constant_low"] = r.constant[0];
  j["constant_mid"] = r.constant[1];
  j["constant_high"] = r.constant[2];
  j["verdict_low"] = r.constant[0] ? "CONSTANT" : "VARIABLE";
  j["verdict_mid"] = r.constant[1] ? "CONSTANT" : "VARIABLE";
  j["verdict_high"] = r.constant[2] ? "CONSTANT" : "VARIABLE";
  j["predicted_absolute_continuity"] = r.predicted_absolute_continuity;
  j["predicted_c1_rigidity"] = r.predicted_c1_rigidity;
  return j;
}

struct BoxBundle {
  FoliationBundles bundles;
  bool ready = false;
};

}  // namespace

int run_scenario(const ExperimentConfig& config, const RunOverrides& overrides,
                 std::ostream& log) {
  ExperimentConfig cfg = config;
  if (overrides.scenario) cfg.scenario = *overrides.scenario;
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.workers) cfg.workers = *overrides.workers;
  std::filesystem::path out = overrides.out_dir.value_or(std::filesystem::path(cfg.out_dir));
  if (!is_known_scenario(cfg.scenario)) throw ConfigError("unknown scenario " + cfg.scenario);

  const int workers = cfg.workers;
  if (workers > 0) set_default_worker_count(workers);

  RunContext ctx(out, log);
  json summary;
  summary["scenario"] = cfg.scenario;
  summary["seed"] = cfg.seed;
  summary["tool_version"] = kToolVersion;

  DAMap f = build_map(cfg);
  const LinearAnosov& A = f.linear();
  summary["splitting"] = splitting_name(A.splitting);
  summary["exponents_linear"] = {A.exponents[0], A.exponents[1], A.exponents[2]};

  // certification gates everything downstream
  PHCertificate cert;
  ctx.stage("certify", [&] {
    cert = verify_partial_hyperbolicity(f, cfg.certify_iterates, cfg.certify_grid,
                                        cfg.apertures, workers);
    ctx.write_text("certificate.json", certificate_json(cert).dump(2) + "\n");
  });
  summary["certificate"] = certificate_json(cert);
  if (!cert.verified) {
    ctx.write_text("summary.json", summary.dump(2) + "\n");
    ctx.write_text("run_manifest.json",
                   ctx.manifest(cfg, cfg.scenario, cfg.seed).dump(2) + "\n");
    ctx.log() << "certification failed; downstream stages skipped\n";
    return kExitCertification;
  }

  const bool survey = cfg.scenario == "full-survey";
  auto want = [&](const char* s) { return survey || cfg.scenario == s; };

  if (want("exponents")) {
    ctx.stage("exponents", [&] {
      ExponentEstimate est = volume_average_exponents(f, cfg.exp_samples, cfg.exp_orbit_length,
                                                      cfg.seed, cfg.exp_burn_in, workers);
      InequalityReport rep = exponent_inequality_report(f, cert, est, cfg.exp_zero_sum_tol);
      ctx.write_text("exponents.csv", exponents_csv(est));
      summary["exponents"] = inequality_json(rep, est);
    });
  }

  if (want("periodic")) {
    ctx.stage("periodic", [&] {
      ConstancyReport rep = periodic_data_constancy(f, cfg.periodic_max_period,
                                                    cfg.periodic_tolerance,
                                                    cfg.periodic_count_cap, workers);
      ctx.write_text("periodic_data.csv", periodic_csv(rep));
      summary["periodic"] = constancy_json(rep);
    });
  }

  if (want("conjugacy")) {
    ctx.stage("conjugacy", [&] {
      ConjugacyField h = solve_semiconjugacy(f, cfg.conj_resolution, cfg.conj_tolerance,
                                             cfg.conj_max_iterations,
                                             cfg.conj_interpolation_order, workers);
      ResidualStats res = conjugacy_residual(h, f, cfg.conj_residual_samples, cfg.seed, workers);
      save_conjugacy_field(ctx.dir() / "conjugacy_field.bin", h, res);
      ctx.note_file("conjugacy_field.bin");
      ctx.note_file("conjugacy_field.bin.txt");
      FiberReport fiber = fiber_diagnostics(h, f, cfg.conj_fiber_samples, cfg.seed);
      double disp_sup = f.displacement_sup();
      json j;
      j["resolution"] = h.resolution;
      j["interpolation_order"] = h.interpolation_order;
      j["iterations"] = h.iterations;
      j["node_sup_residual"] = h.final_sup_residual;
      j["offgrid_sup_residual"] = res.sup;
      j["offgrid_mean_residual"] = res.mean;
      j["residual_samples"] = res.samples;
      j["sup_displacement"] = h.sup_displacement();
      j["sup_map_deviation"] = disp_sup;
      j["c_emp"] = disp_sup > 0 ? h.sup_displacement() / disp_sup : 0.0;
      j["fiber_defect"] = fiber.defect;
      j["fiber_center_alignment"] = fiber.center_alignment;
      j["fiber_close_pairs"] = fiber.close_pairs;
      if (!f.is_linear()) {
        RatioCheckResult rc = geometric_ratio_check(
            f, 2, cfg.conj_ratio_iterate, cfg.conj_ratio_bound, 200,
            {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}, cfg.seed);
        j["ratio_found"] = rc.found;
        j["ratio_m"] = rc.m_estimate;
      }
      summary["conjugacy"] = j;
    });
  }

  BoxBundle bb;
  auto need_bundles = [&]() -> FoliationBundles& {
    if (!bb.ready) {
      ctx.stage("bundles", [&] {
        bb.bundles = compute_bundles(f, cfg.fol_resolution, cfg.fol_max_iterations, 1e-10,
                                     workers);
        bb.bundles.strong.invariance_residual =
            measure_invariance(f, bb.bundles.strong, cfg.fol_residual_samples, cfg.seed, workers);
        bb.bundles.center.invariance_residual =
            measure_invariance(f, bb.bundles.center, cfg.fol_residual_samples, cfg.seed, workers);
        bb.bundles.unstable.invariance_residual = measure_invariance(
            f, bb.bundles.unstable, cfg.fol_residual_samples, cfg.seed, workers);
      });
      bb.ready = true;
    }
    return bb.bundles;
  };

  if (want("foliation")) {
    FoliationBundles& bundles = need_bundles();
    ctx.stage("foliation", [&] {
      json j;
      for (const BundleField* b : {&bundles.strong, &bundles.center, &bundles.unstable}) {
        std::string name = "bundle_" + b->label_name + ".bin";
        save_bundle_field(ctx.dir() / name, *b);
        ctx.note_file(name);
        ctx.note_file(name + ".txt");
        json bj;
        bj["iterations"] = b->iterations;
        bj["invariance_residual"] = b->invariance_residual;
        j[b->label_name] = bj;
      }

      TorusPoint base = wrap(cfg.box_base);
      CenterCurve curve = integrate_center_curve(bundles.center, base,
                                                 cfg.box_leaf_half_length, cfg.fol_curve_step);
      std::string csv = "arclength,x,y,z\n";
      char buf[256];
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", curve.arclength[i],
                      curve.points[i][0], curve.points[i][1], curve.points[i][2]);
        csv += buf;
      }
      ctx.write_text("center_curve.csv", csv);

      // holonomy between two unstable transversals of one cu-plaque
      Transversal src = make_transversal(bundles, PlaqueKind::CenterUnstable, base, 0.05,
                                         cfg.fol_curve_step);
      TorusPoint tgt_base = wrap(curve.at(0.5 * cfg.box_leaf_half_length));
      Transversal tgt = make_transversal(bundles, PlaqueKind::CenterUnstable, tgt_base, 0.08,
                                         cfg.fol_curve_step);
      HolonomyMap hol = center_holonomy(bundles, PlaqueKind::CenterUnstable, src, tgt, 17,
                                        4.0 * cfg.box_leaf_half_length);
      std::string hcsv = "source_param,image_param,leaf_travel\n";
      for (std::size_t i = 0; i < hol.source_param.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", hol.source_param[i],
                      hol.image_param[i], hol.leaf_travel[i]);
        hcsv += buf;
      }
      ctx.write_text("holonomy.csv", hcsv);
      j["holonomy_lipschitz_forward"] = hol.lipschitz_forward;
      j["holonomy_lipschitz_backward"] = hol.lipschitz_backward;
      j["holonomy_monotone"] = hol.monotone;
      summary["foliation"] = j;
    });
  }

  if (want("disintegrate")) {
    FoliationBundles& bundles = need_bundles();
    ctx.stage("disintegrate", [&] {
      FoliatedBox box = build_foliated_box(f, bundles, wrap(cfg.box_base), cfg.box_half_a,
                                           cfg.box_half_b, cfg.box_leaf_half_length,
                                           cfg.box_cells_per_side, cfg.box_cells_per_side,
                                           cfg.fol_curve_step);
      int finest = cfg.dis_bins << (cfg.dis_levels - 1);
      auto hist = estimate_conditionals(box, cfg.dis_samples, finest, cfg.seed,
                                        cfg.dis_min_cell_count, workers);
      std::vector<std::vector<ConditionalHistogram>> levels(static_cast<std::size_t>(cfg.dis_levels));
      levels.back() = hist;
      for (int l = cfg.dis_levels - 2; l >= 0; --l) {
        for (const auto& h : levels[static_cast<std::size_t>(l) + 1])
          levels[static_cast<std::size_t>(l)].push_back(merge_bins(h));
      }
      ClassifierThresholds th;
      th.atom_mass = cfg.dis_atom_threshold;
      DisintegrationReport rep = classify_disintegration(levels, th);

      std::string csv = "level,bins,cell,bin,mass,raw_count\n";
      char buf[256];
      for (std::size_t l = 0; l < levels.size(); ++l) {
        for (const auto& h : levels[l]) {
          for (int b = 0; b < h.bins; ++b) {
            std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%.17g,%lld\n", l, h.bins, h.cell, b,
                          h.mass[static_cast<std::size_t>(b)],
                          static_cast<long long>(h.raw_count));
            csv += buf;
          }
        }
      }
      ctx.write_text("histograms.csv", csv);

      ConcentrationProfile prof = concentration_profile(box, cfg.dis_samples,
                                                        cfg.dis_concentration_windows,
                                                        cfg.seed, 0.6, workers);
      std::string ccsv = "window_length,volume_fraction,standard_error\n";
      for (std::size_t i = 0; i < prof.window_lengths.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", prof.window_lengths[i],
                      prof.volume_fraction[i], prof.standard_error[i]);
        ccsv += buf;
      }
      ctx.write_text("concentration.csv", ccsv);

      CounterRng rng(cfg.seed, "birkhoff");
      BirkhoffReport birk = birkhoff_discrepancy(f, rng.torus_point(), cfg.dis_birkhoff_n,
                                                 cfg.dis_birkhoff_dict);
      std::string bcsv = "character,modulus\n";
      for (std::size_t i = 0; i < birk.per_character.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, birk.per_character[i]);
        bcsv += buf;
      }
      ctx.write_text("birkhoff.csv", bcsv);

      json j;
      j["verdict"] = verdict_name(rep.verdict);
      j["atom_threshold"] = th.atom_mass;
      j["ks_family_alpha"] = th.ks_family_alpha;
      json lv = json::array();
      for (const auto& st : rep.levels) {
        lv.push_back({{"bins", st.bins},
                      {"ks_mean", st.ks_mean},
                      {"ks_max", st.ks_max},
                      {"ks_critical", st.ks_critical},
                      {"uniform_pass", st.uniform_pass},
                      {"max_bin_mean", st.max_bin_mean},
                      {"max_bin_max", st.max_bin_max},
                      {"top1_mass", st.top1_mass},
                      {"top5_mass", st.top5_mass}});
      }
      j["levels"] = lv;
      j["birkhoff_discrepancy"] = birk.discrepancy;
      j["birkhoff_non_generic"] = birk.non_generic;
      j["concentration_final"] = prof.volume_fraction.empty() ? 0.0
                                                              : prof.volume_fraction.back();
      summary["disintegration"] = j;
    });
  }

  if (want("mk")) {
    FoliationBundles& bundles = need_bundles();
    ctx.stage("mk", [&] {
      MkConstruction mk(f, bundles, cfg.mk_gamma0, cfg.mk_k_max, cfg.mk_curve_step);
      auto xis = mk.reference_points(cfg.mk_xi_per_side, cfg.mk_xi_half_size);
      MkScan scan = mk_length_ratio_scan(mk, xis, cfg.mk_k_max);
      std::string csv = "xi_index,level,mass,length,ratio\n";
      char buf[256];
      for (const auto& r : scan.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", r.xi_index, r.level,
                      r.mass, r.length, r.ratio);
        csv += buf;
      }
      ctx.write_text("mk_scan.csv", csv);

      CounterRng rng(cfg.seed, "mk_exponent");
      TorusPoint x = rng.torus_point();
      double lam_c = center_exponent_from_mk(f, bundles, x, cfg.mk_exponent_n);
      ExponentEstimate est = volume_average_exponents(f, 50, 2000, cfg.seed, 100, workers);

      json j;
      j["lambda"] = mk.lambda();
      j["gamma0"] = mk.gamma0();
      j["beta"] = scan.beta;
      j["trend_slope"] = scan.trend_slope;
      j["trend_se"] = scan.trend_se;
      j["trend_significant"] = scan.trend_significant;
      j["center_exponent_mk"] = lam_c;
      j["center_exponent_cocycle"] = est.mean.mid;
      j["center_exponent_gap"] = std::abs(lam_c - est.mean.mid);
      summary["mk"] = j;
    });
  }

  ctx.write_text("summary.json", summary.dump(2) + "\n");
  ctx.write_text("run_manifest.json", ctx.manifest(cfg, cfg.scenario, cfg.seed).dump(2) + "\n");
  return kExitOk;
}

namespace {

void diff_json(const std::string& path, const json& a, const json& b, CompareReport& out) {
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (b.contains(it.key())) {
        diff_json(path + "/" + it.key(), it.value(), b.at(it.key()), out);
      } else {
        out.identical = false;
        out.rows.push_back({path + "/" + it.key(), it.value().dump(), "<missing>", 0.0, true});
      }
    }
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (!a.contains(it.key())) {
        out.identical = false;
        out.rows.push_back({path + "/" + it.key(), "<missing>", it.value().dump(), 0.0, true});
      }
    }
    return;
  }
  if (a.is_array() && b.is_array() && a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      diff_json(path + "/" + std::to_string(i), a[i], b[i], out);
    return;
  }
  if (a == b) return;
  out.identical = false;
  CompareRow row;
  row.path = path;
  row.a = a.dump();
  row.b = b.dump();
  if (a.is_number() && b.is_number()) {
    row.numeric_diff = b.get<double>() - a.get<double>();
  } else {
    row.categorical = true;
  }
  out.rows.push_back(row);
}

json load_json(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot open " + p.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw SchemaMismatch("manifest parse error in " + p.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

CompareReport compare_manifests(const std::filesystem::path& manifest_a,
                                const std::filesystem::path& manifest_b) {
  json ma = load_json(manifest_a);
  json mb = load_json(manifest_b);
  for (const auto* m : {&ma, &mb}) {
    if (!m->contains("scenario") || !m->contains("files")) {
      throw SchemaMismatch("not a run manifest");
    }
  }
  if (ma["scenario"] != mb["scenario"]) {
    throw SchemaMismatch("scenario mismatch: " + ma["scenario"].get<std::string>() + " vs " +
                         mb["scenario"].get<std::string>());
  }

  CompareReport report;
  // file digests
  auto digest_map = [](const json& m) {
    std::map<std::string, std::string> d;
    for (const auto& f : m.at("files")) d[f.at("name")] = f.at("sha256");
    return d;
  };
  auto da = digest_map(ma), db = digest_map(mb);
  for (const auto& [name, sha] : da) {
    auto it = db.find(name);
    if (it == db.end()) {
      report.identical = false;
      report.rows.push_back({"files/" + name, sha, "<missing>", 0.0, true});
    } else if (it->second != sha) {
      report.identical = false;
      report.rows.push_back({"files/" + name + "/sha256", sha, it->second, 0.0, true});
    }
  }
  for (const auto& [name, sha] : db) {
    if (!da.contains(name)) {
      report.identical = false;
      report.rows.push_back({"files/" + name, "<missing>", sha, 0.0, true});
    }
  }

  // metric-level diffs from the summaries next to the manifests
  auto sa = manifest_a.parent_path() / "summary.json";
  auto sb = manifest_b.parent_path() / "summary.json";
  if (std::filesystem::exists(sa) && std::filesystem::exists(sb)) {
    json ja = load_json(sa);
    json jb = load_json(sb);
    ja.erase("seed");
    jb.erase("seed");
    diff_json("summary", ja, jb, report);
  }
  return report;
}

}  // namespace dav
