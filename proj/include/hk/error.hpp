#pragma once

#include <stdexcept>
#include <string>

namespace hk {

/// Failure codes surfaced by the toolkit. The CLI maps them onto exit codes.
enum class Errc {
  FileNotFound,
  ParseError,
  DimensionMismatch,
  RectOutOfBounds,
  DegenerateHistogram,
  InsufficientSupport,
  CenterInvalid,
  NoCandidates,
  SingleCandidate,
  NoValidPixels,
  BadParams,
  ConfigError,
};

inline const char* errcName(Errc c) {
  switch (c) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::ParseError: return "ParseError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::RectOutOfBounds: return "RectOutOfBounds";
    case Errc::DegenerateHistogram: return "DegenerateHistogram";
    case Errc::InsufficientSupport: return "InsufficientSupport";
    case Errc::CenterInvalid: return "CenterInvalid";
    case Errc::NoCandidates: return "NoCandidates";
    case Errc::SingleCandidate: return "SingleCandidate";
    case Errc::NoValidPixels: return "NoValidPixels";
    case Errc::BadParams: return "BadParams";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hk
