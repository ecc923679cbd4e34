#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fuzzymon {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs violate a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The engine reached a state its own invariants rule out (zero
/// normalisation, norm drift beyond tolerance).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A diagnostic was requested for a configuration it is not defined for.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A readout lies outside every window of a hard-wall meter.
class ImpossibleReadoutError : public Error {
 public:
  using Error::Error;
};

/// Post-selection left zero total weight.
class EmptySelectionError : public Error {
 public:
  using Error::Error;
};

/// Too few populated bins for a goodness-of-fit statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A trajectory inside a batch failed; carries the offending stream id.
class BatchError : public Error {
 public:
  BatchError(std::uint64_t stream_id, const std::string& what)
      : Error("trajectory " + std::to_string(stream_id) + ": " + what),
        stream_id_(stream_id) {}

  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t stream_id_;
};

}  // namespace fuzzymon
