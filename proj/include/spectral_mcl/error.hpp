#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectral_mcl {

enum class ErrorKind {
  ZeroSpectrum,
  InvalidOrder,
  GridMismatch,
  DegenerateWeight,
  InvalidScale,
  InsufficientLibrary,
  MapMismatch,
  UnknownMaterial,
  EmptyMap,
  OutOfBounds,
  InvalidCovariance,
  InfeasibleSpec,
  InvalidPose,
  InvalidScript,
  NoOverlap,
  DegenerateGeometry,
  InsufficientData,
  ParseError,
  IoError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroSpectrum: return "ZeroSpectrum";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateWeight: return "DegenerateWeight";
    case ErrorKind::InvalidScale: return "InvalidScale";
    case ErrorKind::InsufficientLibrary: return "InsufficientLibrary";
    case ErrorKind::MapMismatch: return "MapMismatch";
    case ErrorKind::UnknownMaterial: return "UnknownMaterial";
    case ErrorKind::EmptyMap: return "EmptyMap";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::InvalidCovariance: return "InvalidCovariance";
    case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::InvalidPose: return "InvalidPose";
    case ErrorKind::InvalidScript: return "InvalidScript";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Errors caused by bad user input (files, flags, scripts) rather than by
/// numerical failures inside the engine. The CLI maps these to exit code 2.
constexpr bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MapMismatch:
    case ErrorKind::UnknownMaterial:
    case ErrorKind::InfeasibleSpec:
    case ErrorKind::InvalidScript:
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
    case ErrorKind::InvalidArgument:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace spectral_mcl
