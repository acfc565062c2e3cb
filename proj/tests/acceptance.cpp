// Acceptance run: every criterion at full budget, one line each.
#include <cstdio>
#include <exception>

#include "gwtrap/experiments.hpp"
#include "gwtrap/verify.hpp"

int main(int argc, char** argv) {
  try {
    gwtrap::VerifyOptions opt;
    if (argc > 1) opt.cfg = gwtrap::load_config(argv[1]);
    opt.report_constants = false;
    opt.on_result = [](const gwtrap::CriterionResult& r) {
      std::printf("%s\n", gwtrap::format_line(r).c_str());
      std::fflush(stdout);
    };
    const auto run = gwtrap::run_verify_all(opt);
    int failed = 0;
    for (const auto& r : run.criteria) failed += !r.passed;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(run.criteria.size()) - failed,
                run.criteria.size());
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
