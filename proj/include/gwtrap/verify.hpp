// SPDX-License-Identifier: Apache-2.0
//
// The acceptance suite: numbered checks against exact solvers, closed forms
// and Monte Carlo, shared by `gwtrap verify-all` and the acceptance test.
#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gwtrap/experiments.hpp"

namespace gwtrap {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary;
  Json detail = Json::object();
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct VerifyOptions {
  ExperimentConfig cfg;
  /// Empty runs every criterion.
  std::set<int> only;
  std::function<void(const CriterionResult&)> on_result;
  /// Also estimate the tail constants (d₁, d₂, c₁ and the empirical
  /// return-time constant). Not gated.
  bool report_constants = true;
};

struct VerifyRun {
  std::vector<CriterionResult> criteria;
  Json constants = Json::object();
};

VerifyRun run_verify_all(const VerifyOptions& options);

/// "[PASS] 3 title: summary (1.2 s)".
std::string format_line(const CriterionResult& r);

Json verify_report(const VerifyRun& run);

}  // namespace gwtrap
