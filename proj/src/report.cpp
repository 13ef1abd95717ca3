#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "catree/bench.hpp"

namespace catree::bench {

namespace {

constexpr const char* kColumns[] = {
    "structure",      "mode",          "threads",       "S",
    "R_or_fixedRange", "insertPct",    "removePct",     "lookupPct",
    "rangePct",       "run",           "opsPerUs",      "updateOpsPerUs",
    "rangeOpsPerUs",  "rangeThroughputScaled", "baseNodes", "traversedPerRQ",
    "avgItemsPerRQ",  "seed"};

}  // namespace

void write_csv(std::ostream& out, const std::vector<BenchResult>& results) {
  const auto flags = out.flags();
  const auto precision = out.precision(6);
  out.unsetf(std::ios::floatfield);
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& res : results) {
    const auto& s = res.spec;
    for (const auto& r : res.runs) {
      out << to_string(s.structure) << ',' << to_string(s.mode) << ',' << s.threads << ','
          << s.key_range << ',' << s.range_size_param() << ',' << s.insert_pct << ','
          << s.remove_pct << ',' << s.lookup_pct << ',' << s.range_pct << ',' << r.run_index
          << ',' << r.ops_per_us << ',' << r.update_ops_per_us << ',' << r.range_ops_per_us
          << ',' << r.range_throughput_scaled << ',' << r.base_nodes << ','
          << r.traversed_per_rq << ',' << r.avg_items_per_rq << ',' << s.seed << '\n';
    }
  }
  out.precision(precision);
  out.flags(flags);
}

void write_csv_file(const std::string& path, const std::vector<BenchResult>& results) {
  std::ofstream out{path};
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, results);
  out.flush();
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

void write_summary(std::ostream& out, const BenchResult& result) {
  const auto& s = result.spec;
  const auto flags = out.flags();
  const auto precision = out.precision(4);
  out << to_string(s.structure) << ' ' << to_string(s.mode) << " threads=" << s.threads
      << " S=" << s.key_range;
  if (s.mode == Mode::mix) {
    out << " mix=" << s.insert_pct + s.remove_pct << ',' << s.lookup_pct << ','
        << s.range_pct << " R=" << s.max_range;
  } else {
    out << " range=" << s.fixed_range;
  }
  out << '\n'
      << "  ops/us mean " << result.mean_ops_per_us() << " (min " << result.min_ops_per_us()
      << ", max " << result.max_ops_per_us() << ")\n"
      << "  update ops/us " << result.mean_update_ops_per_us() << ", range ops/us "
      << result.mean_range_ops_per_us() << '\n';
  for (const auto& r : result.runs) {
    out << "  run " << r.run_index << ": " << r.ops << " ops in " << r.seconds << " s, base nodes "
        << r.base_nodes << ", traversed/rq " << r.traversed_per_rq << ", items/rq "
        << r.avg_items_per_rq;
    if (r.expected_items_per_rq > 0)
      out << " (expected " << r.expected_items_per_rq << (r.sanity_ok ? ", ok" : ", MISMATCH")
          << ')';
    out << ", size " << r.size_before << " -> " << r.size_after << '\n';
  }
  out.precision(precision);
  out.flags(flags);
}

}  // namespace catree::bench
