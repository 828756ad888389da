#pragma once

#include <stdexcept>
#include <string>

namespace loadshape {

// Base class for every error raised by the library. Callers that only need a
// message can catch this; the subclasses exist so tests and the CLI can tell
// failure kinds apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Header mismatch, unknown survey column, malformed document.
class FormatError : public Error {
 public:
  using Error::Error;
};

class DuplicateKeyError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// A perfectly flat day has no discretionary usage to normalize.
class ZeroDiscretionaryError : public Error {
 public:
  using Error::Error;
};

class DegenerateCenterError : public Error {
 public:
  using Error::Error;
};

class NotADistributionError : public Error {
 public:
  using Error::Error;
};

class VersionMismatchError : public Error {
 public:
  VersionMismatchError(int found, int expected)
      : Error("dictionary schema version mismatch: file has version " + std::to_string(found) +
              ", this build reads version " + std::to_string(expected)),
        found_(found),
        expected_(expected) {}

  int found() const { return found_; }
  int expected() const { return expected_; }

 private:
  int found_;
  int expected_;
};

class DigestMismatchError : public Error {
 public:
  using Error::Error;
};

// A persisted artifact loaded fine but breaks one of its documented invariants.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace loadshape
