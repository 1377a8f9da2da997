#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace layoutforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

// Invalid layout content (zero-length wall, unknown group, bad bounds, ...).
class InvalidLayout : public Error {
 public:
  using Error::Error;
};

// Query or reference set is empty after sampling.
class EmptyRegionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A hierarchy stage produced a non-finite objective or otherwise failed.
class StageFailure : public Error {
 public:
  StageFailure(std::size_t stage, const std::string& what)
      : Error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  std::size_t stage() const noexcept { return stage_; }

 private:
  std::size_t stage_;
};

class Cancelled : public Error {
 public:
  Cancelled() : Error("cancelled") {}
};

}  // namespace layoutforge
