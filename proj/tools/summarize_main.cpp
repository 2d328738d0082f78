// Turns a JSONL record file into estimates.csv and slopes.csv.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gff2d/errors.hpp"
#include "gff2d/summarize.hpp"

int main(int argc, char** argv) {
  CLI::App app{"summarize simulation records into CSV tables"};
  std::string in_path, out_dir;
  app.add_option("--in", in_path, "JSONL record file")->required();
  app.add_option("--out", out_dir, "output directory for CSV tables")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return gff2d::run_summarize(in_path, out_dir, std::cerr);
  } catch (const gff2d::ConfigError& e) {
    std::cerr << "summarize: " << e.what() << "\n";
    return 2;
  } catch (const gff2d::CapacityError& e) {
    std::cerr << "summarize: " << e.what() << "\n";
    return 3;
  } catch (const gff2d::IoError& e) {
    std::cerr << "summarize: " << e.what() << "\n";
    return 4;
  }
}