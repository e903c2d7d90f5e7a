#pragma once

#include <stdexcept>
#include <string>

namespace occureward {

enum class ErrorCode {
  InvalidInput,
  Format,
  Config,
  InsufficientData,
  DegenerateRange,
  DegenerateBaseline,
  ProtocolViolation,
  Parse,
  Transport,
  EpisodeComplete,
  PolicyFault,
  TrainingFault,
  Io,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::Format: return "format";
    case ErrorCode::Config: return "config";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::DegenerateRange: return "degenerate-range";
    case ErrorCode::DegenerateBaseline: return "degenerate-baseline";
    case ErrorCode::ProtocolViolation: return "protocol-violation";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::EpisodeComplete: return "episode-complete";
    case ErrorCode::PolicyFault: return "policy-fault";
    case ErrorCode::TrainingFault: return "training-fault";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace occureward
