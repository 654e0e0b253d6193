#pragma once

#include <stdexcept>
#include <string>

namespace nla {

/// A parameter point lies outside the physically reachable domain
/// (e.g. no transmissivity in (0,1) realises the requested success rate).
class InfeasibleError : public std::domain_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::domain_error(what) {}
};

/// A requested entanglement level cannot be reached at the given operating point.
class UnachievableError : public std::domain_error {
 public:
  explicit UnachievableError(const std::string& what) : std::domain_error(what) {}
};

/// The Fock truncation discards more population than the caller allows.
class TruncationError : public std::runtime_error {
 public:
  explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

/// The conditioning quadrature has zero variance, so no estimator gain exists.
class DegenerateConditionerError : public std::domain_error {
 public:
  explicit DegenerateConditionerError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace nla
