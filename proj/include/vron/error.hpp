#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vron {

/// Every failure mode has a stable code. CLI tools exit with the numeric
/// value, so codes must never be renumbered.
enum class ErrorCode : int {
  // encoding / decoding
  EncodingOverflow = 10,
  MalformedProvenance = 11,
  MalformedContainer = 12,
  MalformedMessage = 13,

  // crypto and attestation
  EmptyKey = 20,
  InvalidKey = 21,
  EmptyIdentity = 22,
  EntropyUnavailable = 23,
  AttestationRefused = 24,

  // camera
  SessionFinished = 30,
  MixedDimensions = 31,
  EmptySegment = 32,

  // stages
  CameraSigInvalid = 40,
  NonceMismatch = 41,
  FrameCountMismatch = 42,
  BadParameters = 43,
  UpstreamSigInvalid = 44,
  UpstreamCertUntrusted = 45,
  MissingFrames = 46,
  DuplicateFrame = 47,
  ProvenanceMismatch = 48,
  AudioSigInvalid = 49,
  MissingSidecar = 50,

  // scheduler / wire
  StageCrashed = 60,
  PipelineRejected = 61,
  SpawnFailed = 62,
  FrameTooLarge = 63,
  Truncated = 64,

  // harnesses
  InapplicableKind = 70,
  OutputDivergence = 71,

  // misc
  IoError = 80,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::EncodingOverflow: return "EncodingOverflow";
    case ErrorCode::MalformedProvenance: return "MalformedProvenance";
    case ErrorCode::MalformedContainer: return "MalformedContainer";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::EmptyKey: return "EmptyKey";
    case ErrorCode::InvalidKey: return "InvalidKey";
    case ErrorCode::EmptyIdentity: return "EmptyIdentity";
    case ErrorCode::EntropyUnavailable: return "EntropyUnavailable";
    case ErrorCode::AttestationRefused: return "AttestationRefused";
    case ErrorCode::SessionFinished: return "SessionFinished";
    case ErrorCode::MixedDimensions: return "MixedDimensions";
    case ErrorCode::EmptySegment: return "EmptySegment";
    case ErrorCode::CameraSigInvalid: return "CameraSigInvalid";
    case ErrorCode::NonceMismatch: return "NonceMismatch";
    case ErrorCode::FrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::BadParameters: return "BadParameters";
    case ErrorCode::UpstreamSigInvalid: return "UpstreamSigInvalid";
    case ErrorCode::UpstreamCertUntrusted: return "UpstreamCertUntrusted";
    case ErrorCode::MissingFrames: return "MissingFrames";
    case ErrorCode::DuplicateFrame: return "DuplicateFrame";
    case ErrorCode::ProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorCode::AudioSigInvalid: return "AudioSigInvalid";
    case ErrorCode::MissingSidecar: return "MissingSidecar";
    case ErrorCode::StageCrashed: return "StageCrashed";
    case ErrorCode::PipelineRejected: return "PipelineRejected";
    case ErrorCode::SpawnFailed: return "SpawnFailed";
    case ErrorCode::FrameTooLarge: return "FrameTooLarge";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::InapplicableKind: return "InapplicableKind";
    case ErrorCode::OutputDivergence: return "OutputDivergence";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const { return code_; }

  /// For PipelineRejected: the stage error that caused the rejection.
  ErrorCode cause() const { return cause_; }
  Error& with_cause(ErrorCode c) {
    cause_ = c;
    return *this;
  }

private:
  ErrorCode code_;
  ErrorCode cause_ = ErrorCode::PipelineRejected;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace vron
