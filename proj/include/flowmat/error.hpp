#pragma once

#include <stdexcept>
#include <string>

namespace flowmat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad key material, flag values, or generator parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable input, failed socket setup, or failed archive writes.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A serialized matrix or archive member failed validation.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A packet-count sum left the unsigned 64-bit range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowmat
