// Throughput benchmark for the contention-adapting tree and the coarse
// baseline. Prints a summary per configuration and optionally writes CSV.

#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "catree/bench.hpp"

namespace {

std::vector<double> parse_mix(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in{text};
  std::string field;
  while (std::getline(in, field, ',')) parts.push_back(std::stod(field));
  if (parts.size() != 3) throw std::invalid_argument("--mix expects A,B,C");
  return parts;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace catree::bench;
  WorkloadSpec spec;
  std::string mix = "20,55,25";
  std::string csv_path;

  CLI::App app{"Concurrent ordered set throughput benchmark"};
  const std::map<std::string, Structure> structures{{"catree", Structure::catree},
                                                    {"coarse", Structure::coarse}};
  const std::map<std::string, Mode> modes{{"mix", Mode::mix}, {"split-duty", Mode::split_duty}};
  std::string structure = "catree";
  std::string mode = "mix";
  app.add_option("--structure", structure, "catree or coarse")
      ->check(CLI::IsMember(structures));
  app.add_option("--mode", mode, "mix or split-duty")->check(CLI::IsMember(modes));
  app.add_option("--threads", spec.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--key-range", spec.key_range, "key range size S");
  auto* max_range = app.add_option("--max-range", spec.max_range,
                                    "mix mode: range sizes uniform in [1, R]");
  auto* fixed_range = app.add_option("--fixed-range", spec.fixed_range,
                                     "split-duty mode: range size of range-query threads");
  max_range->excludes(fixed_range);
  app.add_option("--mix", mix, "update%,lookup%,range% (updates split evenly)");
  app.add_option("--warmup-runs", spec.warmup_runs);
  app.add_option("--measure-runs", spec.measure_runs);
  app.add_option("--warmup-seconds", spec.warmup_seconds, "length of each warmup run");
  app.add_option("--seconds", spec.run_seconds, "length of each measured run");
  app.add_option("--seed", spec.seed);
  app.add_option("--csv", csv_path, "write per-run rows to this file");
  CLI11_PARSE(app, argc, argv);
  spec.structure = structures.at(structure);
  spec.mode = modes.at(mode);

  try {
    const auto parts = parse_mix(mix);
    spec.set_mix(parts[0], parts[1], parts[2]);
  } catch (const std::exception& e) {
    std::cerr << "error: bad --mix '" << mix << "': " << e.what() << '\n';
    return 2;
  }
  if (const auto err = validate(spec); !err.empty()) {
    std::cerr << "error: " << err << '\n';
    return 2;
  }

  BenchResult result;
  try {
    result = run(spec, [](const RunResult& r, bool warmup) {
      std::cerr << (warmup ? "warmup " : "run ") << r.run_index << ": " << r.ops_per_us
                << " ops/us\n";
    });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  write_summary(std::cout, result);
  if (!csv_path.empty()) {
    try {
      write_csv_file(csv_path, {result});
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
  }
  if (!result.sanity_ok()) {
    std::cerr << "error: items per range query deviate from the expected value by more than "
              << kSanityTolerance * 100 << "%\n";
    return 4;
  }
  return 0;
}
