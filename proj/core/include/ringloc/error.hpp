#pragma once

#include <stdexcept>
#include <string>

namespace ringloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A depth sample of 0 (the invalid sentinel) was used where a return is required.
class InvalidDepth : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A fit was attempted on data that cannot determine the model.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

/// No blob could be found to delineate inside a region of interest.
class EmptyContour : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  using Error::Error;
};

/// Malformed input document (ROI file, PLY, config, manifest).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ringloc
