// Command-line experiment runner: one subcommand per scenario plus
// manifest comparison. Exit codes: 0 ok, 2 config, 3 certification,
// 4 numerical nonconvergence, 5 I/O.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dav/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool workers_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--workers", args.workers, "worker count override (0 = machine parallelism)")
      ->each([&](const std::string&) { args.workers_set = true; });
}

int run_with(const CommonArgs& args, const std::string& scenario) {
  dav::ExperimentConfig cfg = dav::load_config(args.config_path);
  dav::RunOverrides ov;
  ov.scenario = scenario;
  if (!args.out_dir.empty()) ov.out_dir = args.out_dir;
  if (args.seed_set) ov.seed = args.seed;
  if (args.workers_set) ov.workers = args.workers;
  return dav::run_scenario(cfg, ov, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"davlab: numerical experiments on derived-from-Anosov maps of T^3"};
  app.require_subcommand(1);

  const char* scenarios[] = {"certify",   "exponents",    "periodic", "conjugacy",
                             "foliation", "disintegrate", "mk",       "full-survey"};
  std::map<std::string, CommonArgs> args;
  for (const char* s : scenarios) {
    auto* cmd = app.add_subcommand(s, std::string("run the ") + s + " scenario");
    add_common(cmd, args[s]);
  }

  std::string manifest_a, manifest_b;
  auto* cmp = app.add_subcommand("compare", "diff two run manifests");
  cmp->add_option("manifest_a", manifest_a, "first run manifest")->required();
  cmp->add_option("manifest_b", manifest_b, "second run manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : dav::kExitConfig;
  }

  try {
    if (cmp->parsed()) {
      dav::CompareReport rep = dav::compare_manifests(manifest_a, manifest_b);
      if (rep.identical) {
        std::cout << "identical\n";
      } else {
        for (const auto& row : rep.rows) {
          if (row.categorical) {
            std::printf("%s: %s -> %s\n", row.path.c_str(), row.a.c_str(), row.b.c_str());
          } else {
            std::printf("%s: %s -> %s (diff %+.17g)\n", row.path.c_str(), row.a.c_str(),
                        row.b.c_str(), row.numeric_diff);
          }
        }
      }
      return dav::kExitOk;
    }
    for (const char* s : scenarios) {
      if (app.get_subcommand(s)->parsed()) return run_with(args[s], s);
    }
    return dav::kExitConfig;
  } catch (const dav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dav::kExitConfig;
  } catch (const dav::CertificationFailed& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return dav::kExitCertification;
  } catch (const dav::SchemaMismatch& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return dav::kExitConfig;
  } catch (const dav::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return dav::kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return dav::kExitIo;
  } catch (const dav::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return dav::kExitNumerical;
  }
}
