#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dnff {

// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidDataset : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Two particles closer than the hard floor.
class OverlapError : public Error {
 public:
  OverlapError(std::size_t i, std::size_t j, double distance)
      : Error("particle overlap between " + std::to_string(i) + " and " +
              std::to_string(j) + " (distance " + std::to_string(distance) + ")"),
        first(i),
        second(j) {}
  std::size_t first;
  std::size_t second;
};

// Non-finite forces during dynamics, or non-finite loss during training.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long index, std::size_t completed = 0)
      : Error(what), index(index), completed(completed) {}
  long index;             // step or epoch at which the blow-up was seen
  std::size_t completed;  // frames (or epochs) finished before it
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved)
      : Error(what), achieved(achieved) {}
  double achieved;
};

// A pipeline stage failed; `stage` names it and the message carries the cause.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage(std::move(stage)) {}
  std::string stage;
};

}  // namespace dnff
