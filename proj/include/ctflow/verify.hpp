#pragma once

// Self-check batteries behind `ctflow verify`. Each suite runs small,
// deterministic instances of the invariant and oracle properties of the
// library; a seed drives the randomized state draws.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctflow {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::size_t failures() const;
};

/// Suite names accepted by run_verify.
const std::vector<std::string>& verify_suites();

/// nullopt when `suite` is not one of verify_suites().
std::optional<VerifyReport> run_verify(const std::string& suite, std::uint64_t seed);

}  // namespace ctflow
