#pragma once

#include <stdexcept>
#include <string>

namespace stackel {

enum class ErrorCode {
  ParseError,
  ConfigError,
  NonSmoothEntry,
  NonPositiveCoefficient,
  SingularGauge,
  NonPositiveReparam,
  SolverDiverged,
  NonPositiveSolution,
  DivisionNearZero,
  IntegratorFailure,
  IntegratorOverflow,
  NewtonStall,
  EigsolverFailure,
  InsufficientPairs,
  InsufficientSpectrum,
  PoleAtDirichletEigenvalue,
  PoleInSpectrum,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NonSmoothEntry: return "NonSmoothEntry";
    case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorCode::SingularGauge: return "SingularGauge";
    case ErrorCode::NonPositiveReparam: return "NonPositiveReparam";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::NonPositiveSolution: return "NonPositiveSolution";
    case ErrorCode::DivisionNearZero: return "DivisionNearZero";
    case ErrorCode::IntegratorFailure: return "IntegratorFailure";
    case ErrorCode::IntegratorOverflow: return "IntegratorOverflow";
    case ErrorCode::NewtonStall: return "NewtonStall";
    case ErrorCode::EigsolverFailure: return "EigsolverFailure";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::InsufficientSpectrum: return "InsufficientSpectrum";
    case ErrorCode::PoleAtDirichletEigenvalue: return "PoleAtDirichletEigenvalue";
    case ErrorCode::PoleInSpectrum: return "PoleInSpectrum";
  }
  return "Unknown";
}

}  // namespace stackel
