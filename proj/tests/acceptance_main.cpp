// Acceptance gate: runs every verification criterion at full scale and
// prints one pass/fail line per criterion.  Exits nonzero on any failure.
//
// Usage: softq_acceptance [--quick] [--report <path>]

#include <cstring>
#include <fstream>
#include <iostream>

#include "softq/acceptance.hpp"

int main(int argc, char** argv) {
  bool quick = false;
  const char* report_path = nullptr;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      quick = true;
    } else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::cerr << "usage: softq_acceptance [--quick] [--report <path>]\n";
      return 2;
    }
  }

  const softq::AcceptanceReport report = softq::run_acceptance(quick, std::cout);
  if (report_path) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "cannot write " << report_path << "\n";
      return 2;
    }
    out << softq::report_to_json(report);
  }
  return report.all_pass ? 0 : 1;
}
