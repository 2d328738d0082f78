// Command-line front end for the experiment drivers. Reads a flat
// key=value config, applies CLI overrides, streams JSONL records to
// --out (or stdout) and wall-clock timings to stderr.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gff2d/config.hpp"
#include "gff2d/errors.hpp"
#include "gff2d/harness.hpp"

namespace {

struct SubArgs {
  CLI::App* app = nullptr;
  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"level-set percolation experiments for the lattice free field"};
  app.require_subcommand(1);

  std::vector<SubArgs> subs(gff2d::subcommand_table().size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto& info = gff2d::subcommand_table()[i];
    SubArgs& s = subs[i];
    s.app = app.add_subcommand(info.name, "");
    s.app->add_option("--config", s.config_path, "key=value config file")
        ->required();
    s.app->add_option("--seed", s.seed, "override the config seed");
    s.app->add_option("--workers", s.workers, "worker thread count")
        ->check(CLI::PositiveNumber);
    s.app->add_option("--out", s.out,
                      "JSONL output path (default: config, else stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      SubArgs& s = subs[i];
      if (!s.app->parsed()) continue;
      gff2d::Config cfg = gff2d::Config::parse_file(s.config_path);
      if (s.app->count("--seed")) cfg.set("seed", std::to_string(s.seed));
      if (s.app->count("--out")) cfg.set("out", s.out);
      if (s.app->count("--workers")) {
        cfg.set("workers", std::to_string(s.workers));
      } else if (const char* env = std::getenv("GFF2D_WORKERS")) {
        cfg.set("workers", env);
      }
      return gff2d::run_simulate(gff2d::subcommand_table()[i].name, cfg,
                                 std::cerr);
    }
    std::cerr << "simulate: no subcommand parsed\n";
    return 2;
  } catch (const gff2d::ConfigError& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 2;
  } catch (const gff2d::CapacityError& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 3;
  } catch (const gff2d::IoError& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 4;
  }
}