#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace yoco {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Composition of transforms whose frame labels do not chain.
class FrameMismatchError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

/// Homography / planar pose system is rank deficient.
class PoseEstimationError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InsufficientPointsError : public Error {
 public:
  using Error::Error;
};

class NoPlaneError : public Error {
 public:
  using Error::Error;
};

enum class ExtractionStage {
  kIngest,
  kNormals,
  kClustering,
  kPlaneFitting,
  kAngleFilter,
  kDistanceSelection,
};

std::string_view to_string(ExtractionStage stage);

class ExtractionError : public Error {
 public:
  ExtractionError(ExtractionStage stage, const std::string& what)
      : Error(std::string("extraction failed at stage '") +
              std::string(to_string(stage)) + "': " + what),
        stage_(stage) {}

  ExtractionStage stage() const noexcept { return stage_; }

 private:
  ExtractionStage stage_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) +
              ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BoardNotVisibleError : public Error {
 public:
  using Error::Error;
};

class InfeasibleSpreadError : public Error {
 public:
  using Error::Error;
};

}  // namespace yoco
