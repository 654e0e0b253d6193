#pragma once

// Cross-checks between closed forms and the Fock-space simulation.

#include <string>
#include <vector>

namespace nla {

struct CheckResult {
  std::string name;
  double error;
  double tolerance;
  bool passed;
  std::string detail;
};

struct VerifyOptions {
  /// Simulations whose truncated population exceeds this are refused.
  double max_tail_mass = 1e-10;
  unsigned threads = 0;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

/// Smallest EPR cutoff with χ^(2(cutoff+1)) ≤ tail.
int epr_cutoff_for_tail(double chi, double tail);

}  // namespace nla
