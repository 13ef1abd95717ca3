// Re-checks recorded operation histories for linearizability.
// Usage: histcheck FILE... ; exit status 1 if any history is not linearizable,
// 2 on input errors or an exhausted search budget.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "catree/linearizability.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> files;
  std::uint64_t budget = catree::kDefaultSearchBudget;
  CLI::App app{"Linearizability check of recorded set histories"};
  app.add_option("files", files, "history files (tab-separated)")->required();
  app.add_option("--budget", budget, "maximum search steps per history");
  CLI11_PARSE(app, argc, argv);

  int status = 0;
  for (const auto& path : files) {
    std::ifstream in{path};
    if (!in) {
      std::cerr << path << ": cannot open\n";
      status = 2;
      continue;
    }
    try {
      const auto result = catree::check_linearizable(catree::read_tsv(in), budget);
      switch (result.verdict) {
        case catree::Verdict::ok:
          std::cout << path << ": ok (" << result.explored << " steps)\n";
          break;
        case catree::Verdict::violation:
          std::cout << path << ": VIOLATION\n" << result.witness << '\n';
          status = std::max(status, 1);
          break;
        case catree::Verdict::inconclusive:
          std::cout << path << ": inconclusive after " << result.explored << " steps\n";
          status = 2;
          break;
      }
    } catch (const std::exception& e) {
      std::cerr << path << ": " << e.what() << '\n';
      status = 2;
    }
  }
  return status;
}
