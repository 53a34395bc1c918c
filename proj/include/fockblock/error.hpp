#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fockblock {

// Base of every exception thrown by the library. code() is a stable
// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension_mismatch", what) {}
};

class TruncationInadequate : public Error {
 public:
  explicit TruncationInadequate(const std::string& what)
      : Error("truncation_inadequate", what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error("invariant_violation", what) {}
};

class UndefinedG2 : public Error {
 public:
  explicit UndefinedG2(const std::string& what) : Error("undefined_g2", what) {}
};

class LeakageExceeded : public Error {
 public:
  LeakageExceeded(const std::string& what, double leakage, double time)
      : Error("leakage_exceeded", what), leakage_(leakage), time_(time) {}
  double leakage() const noexcept { return leakage_; }
  double time() const noexcept { return time_; }

 private:
  double leakage_;
  double time_;
};

class ToleranceFailure : public Error {
 public:
  explicit ToleranceFailure(const std::string& what) : Error("tolerance_failure", what) {}
};

class ConvergenceFailure : public Error {
 public:
  explicit ConvergenceFailure(const std::string& what) : Error("convergence_failure", what) {}
};

class DegenerateNullSpace : public Error {
 public:
  explicit DegenerateNullSpace(const std::string& what) : Error("degenerate_null_space", what) {}
};

class BlockadeIdentificationFailure : public Error {
 public:
  explicit BlockadeIdentificationFailure(const std::string& what)
      : Error("blockade_identification_failure", what) {}
};

class FitRejected : public Error {
 public:
  explicit FitRejected(const std::string& what) : Error("fit_rejected", what) {}
};

class UnresolvedDip : public Error {
 public:
  explicit UnresolvedDip(const std::string& what) : Error("unresolved_dip", what) {}
};

// Target population cannot be reached; carries the best value seen.
class Unreachable : public Error {
 public:
  Unreachable(const std::string& what, double best) : Error("unreachable", what), best_(best) {}
  double best() const noexcept { return best_; }

 private:
  double best_;
};

}  // namespace fockblock
