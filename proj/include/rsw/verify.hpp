#pragma once

// Property suite over every module at small fixed sizes. Each check reports
// its measured value against the limit it was held to.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rsw/model.hpp"

namespace rsw {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double limit = 0.0;
  std::string detail;
};

using CoriolisFn = std::function<State3(const State3&, const State3&, const CoriolisProfile&)>;

struct VerifyOptions {
  /// The Coriolis term under test; replaceable so a broken one can be fed in.
  CoriolisFn coriolis = coriolis_term;
  std::uint64_t seed = 7;
  /// Called after each check finishes.
  std::function<void(const CheckResult&)> on_result;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool passed() const;
};

VerifyReport run_verification(const VerifyOptions& opts = {});

/// "PASS name  measured=... limit=...  detail"
std::string format_check(const CheckResult& c);
nlohmann::json to_json(const VerifyReport& r);

}  // namespace rsw
