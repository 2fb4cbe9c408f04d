#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbftq {

enum class ErrorCode {
  kInvalidParameter,
  kUnstable,
  kIterationLimit,
  kBoundarySolve,
  kSingularRate,
  kTruncationTooSmall,
  kSolve,
  kInvalidConfig,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "INVALID_PARAMETER";
    case ErrorCode::kUnstable: return "UNSTABLE";
    case ErrorCode::kIterationLimit: return "ITERATION_LIMIT";
    case ErrorCode::kBoundarySolve: return "BOUNDARY_SOLVE";
    case ErrorCode::kSingularRate: return "SINGULAR_RATE";
    case ErrorCode::kTruncationTooSmall: return "TRUNCATION_TOO_SMALL";
    case ErrorCode::kSolve: return "SOLVE";
    case ErrorCode::kInvalidConfig: return "INVALID_CONFIG";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class Parameter { kLambda, kMu, kByzantine, kReward };

inline std::string_view to_string(Parameter p) {
  switch (p) {
    case Parameter::kLambda: return "lambda";
    case Parameter::kMu: return "mu";
    case Parameter::kByzantine: return "f";
    case Parameter::kReward: return "c";
  }
  return "?";
}

class ParameterError : public Error {
 public:
  ParameterError(Parameter which, const std::string& what)
      : Error(ErrorCode::kInvalidParameter, what), which_(which) {}

  Parameter parameter() const noexcept { return which_; }

 private:
  Parameter which_;
};

/// Thrown when a solve that requires rho < 1 is handed an unstable instance.
class StabilityError : public Error {
 public:
  StabilityError(double rho, const std::string& what)
      : Error(ErrorCode::kUnstable, what), rho_(rho) {}

  double rho() const noexcept { return rho_; }

 private:
  double rho_;
};

class IterationLimitError : public Error {
 public:
  IterationLimitError(long iterations, double last_step, double last_residual)
      : Error(ErrorCode::kIterationLimit,
              "rate matrix iteration did not converge after " +
                  std::to_string(iterations) + " iterations (last step " +
                  std::to_string(last_step) + ", residual " +
                  std::to_string(last_residual) + ")"),
        iterations_(iterations),
        last_step_(last_step),
        last_residual_(last_residual) {}

  long iterations() const noexcept { return iterations_; }
  double last_step() const noexcept { return last_step_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  long iterations_;
  double last_step_;
  double last_residual_;
};

/// Linear solve failure; carries the reciprocal condition estimate.
class SolveError : public Error {
 public:
  SolveError(ErrorCode code, double rcond, const std::string& what)
      : Error(code, what + " (rcond estimate " + std::to_string(rcond) + ")"),
        rcond_(rcond) {}

  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class TruncationError : public Error {
 public:
  TruncationError(long level_cap, double tail_mass, double threshold)
      : Error(ErrorCode::kTruncationTooSmall,
              "truncation at level " + std::to_string(level_cap) +
                  " leaves tail mass " + std::to_string(tail_mass) +
                  " above threshold " + std::to_string(threshold) +
                  "; increase the level cap"),
        level_cap_(level_cap),
        tail_mass_(tail_mass) {}

  long level_cap() const noexcept { return level_cap_; }
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  long level_cap_;
  double tail_mass_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCode::kInvalidConfig, what) {}
};

}  // namespace pbftq
