#pragma once

#include <stdexcept>
#include <string>

namespace titlegen {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// corpus
struct MalformedMarkup : Error {
  MalformedMarkup(const std::string& what, size_t byte_offset)
      : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  size_t offset;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct EmptyTitle : Error {
  using Error::Error;
};

// tokenizer / model
struct SequenceTooLong : Error {
  using Error::Error;
};

// tensor
struct ShapeMismatch : Error {
  using Error::Error;
};
struct NonScalarLoss : Error {
  using Error::Error;
};

// metrics
struct EmptyReference : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};

// baselines
struct EmptyCorpus : Error {
  using Error::Error;
};
struct EmptyQuery : Error {
  using Error::Error;
};

// io / cli
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace titlegen
