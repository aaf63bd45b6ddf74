#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rfsc {

/// Base class for all library errors. The CLI maps these to a
/// stage-labeled message on stderr and a nonzero exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed container or header; the message names the offending chunk.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Structurally valid container with an unsupported layout (channel
/// count, bit depth, sample format).
class UnsupportedLayoutError : public Error {
public:
  using Error::Error;
};

/// Input ends before the declared payload does.
class TruncationError : public Error {
public:
  TruncationError(const std::string& what, std::size_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
  std::size_t byte_offset_;
};

/// Payload decodes to an invalid value (non-finite sample).
class DecodeError : public Error {
public:
  DecodeError(const std::string& what, std::size_t sample_index)
      : Error(what), sample_index_(sample_index) {}
  std::size_t sample_index() const noexcept { return sample_index_; }

private:
  std::size_t sample_index_;
};

/// Argument violates an operation precondition (cadence, filter design,
/// window size, simulation spec).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Operation requires non-empty input (STFT shorter than one frame,
/// empty manifest or test set).
class EmptyInputError : public Error {
public:
  using Error::Error;
};

/// Matrix/vector dimensions do not agree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Requested more components than the data supports.
class RankError : public Error {
public:
  using Error::Error;
};

/// Data carries no usable signal (all-constant features, single class).
class DegenerateDataError : public Error {
public:
  using Error::Error;
};

/// Data fails a validity requirement (non-finite features, class below
/// minimum count).
class DataError : public Error {
public:
  using Error::Error;
};

/// A class has fewer samples than cross-validation folds.
class StratificationError : public DataError {
public:
  using DataError::DataError;
};

/// Filesystem failure; message carries the path.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace rfsc
