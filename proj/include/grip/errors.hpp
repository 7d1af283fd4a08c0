#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grip {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- wire protocol ---
struct InvalidReading : Error { using Error::Error; };
struct BadSync : Error { using Error::Error; };
struct BadChecksum : Error { using Error::Error; };
struct FieldOutOfRange : Error { using Error::Error; };

// --- calibration ---
struct NegativeResistance : Error { using Error::Error; };
struct OutOfRangeVoltage : Error { using Error::Error; };

// --- data model / persistence ---
struct IoError : Error { using Error::Error; };
struct EmptyFile : Error { using Error::Error; };
struct InconsistentMetadata : Error { using Error::Error; };
struct MalformedRow : Error {
  MalformedRow(std::size_t line_number, const std::string& what)
      : Error("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
  std::size_t line;  // 1-based
};
struct OverlappingSteps : Error { using Error::Error; };
struct StepOutOfSession : Error { using Error::Error; };
struct StepsOutOfOrder : Error { using Error::Error; };

// --- statistics ---
struct EmptyInput : Error { using Error::Error; };
struct SingletonSem : Error { using Error::Error; };
struct InvalidDf : Error { using Error::Error; };
struct ZeroResidualVariance : Error { using Error::Error; };
struct RankDeficientDesign : Error { using Error::Error; };
struct InsufficientResidualDf : Error { using Error::Error; };

// --- profiles ---
struct BoundaryBeyondProfile : Error { using Error::Error; };

// --- simulator / emission ---
struct InvalidConfig : Error { using Error::Error; };
struct SinkError : Error {
  explicit SinkError(const std::string& what, std::size_t frames = 0)
      : Error(what), frames_written(frames) {}
  std::size_t frames_written;
};

}  // namespace grip
