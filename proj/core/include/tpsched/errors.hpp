#pragma once

#include <stdexcept>
#include <string>

namespace tpsched {

/// Malformed input file (CSV/JSON). Message carries the line or record locus.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A domain invariant does not hold (bad field value, duplicate id, missing
/// reference configuration, ...). Message names the offending record.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller broke an API contract (cross-task dominance check, LoadComplete
/// without a pending load, oversized oracle instance, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace tpsched
