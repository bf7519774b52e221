// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "hypl2/verify.hpp"

using hypl2::verify::CriterionResult;

namespace {

// wall-clock budgets in seconds; 0 means none
double budget(int id) {
  switch (id) {
    case 1: return 10;
    case 4: return 60;
    case 7: return 120;
    case 9: return 300;
    default: return 0;
  }
}

CriterionResult criterion_9() {
  CriterionResult r;
  r.id = 9;
  r.title = "end-to-end verify command";
  const auto report = std::filesystem::temp_directory_path() / ("hypl2_acceptance_" + std::to_string(::getpid()) + ".json");
  const std::string cmd = std::string("\"") + HYPL2_CLI + "\" verify -o \"" + report.string() + "\" 2>/dev/null";
  const auto t0 = std::chrono::steady_clock::now();
  const int raw = std::system(cmd.c_str());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::error_code ec;
  std::filesystem::remove(report, ec);
  r.pass = code == 0;
  r.detail = "exit " + std::to_string(code);
  return r;
}

}  // namespace

int main() {
  namespace v = hypl2::verify;
  bool all = true;
  auto report = [&](CriterionResult r) {
    const double limit = budget(r.id);
    if (limit > 0 && r.seconds >= limit) {
      r.pass = false;
      r.detail += ", over budget " + v::detail::fmt(limit) + " s";
    }
    all = all && r.pass;
    std::printf("criterion %d %s  %-40s %7.2f s  %s\n", r.id, r.pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
  };
  report(v::criterion_1());
  report(v::criterion_2());
  report(v::criterion_3());
  report(v::criterion_4());
  report(v::criterion_5());
  report(v::criterion_6());
  report(v::criterion_7());
  report(v::criterion_8());
  report(criterion_9());
  return all ? 0 : 1;
}
