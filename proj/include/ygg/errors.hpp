#pragma once

#include <stdexcept>
#include <string>

namespace ygg {

// Base class for everything the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (bad parameters, length mismatch, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// An exhaustive oracle was asked to run on an instance past its guard.
class InstanceTooLarge : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

// Persistent state or an edit script / deviation does not decode to a
// consistent value. Exit code 3 at the CLI.
class CorruptionError : public Error {
public:
  using Error::Error;
};

// Lookup of an identifier the store does not hold.
class NotFound : public Error {
public:
  using Error::Error;
};

// A roundtrip audit found a chunk that does not reconstruct. Exit code 2.
class VerificationError : public Error {
public:
  using Error::Error;
};

} // namespace ygg
