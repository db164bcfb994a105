#ifndef REPSINDY_ERRORS_HPP_
#define REPSINDY_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace repsindy {

// Base class for every error raised by the library. Tools map these to exit
// codes: IoError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownGame : public Error {
 public:
  explicit UnknownGame(const std::string& name)
      : Error("unknown game '" + name + "'") {}
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class MissingDerivatives : public Error {
 public:
  using Error::Error;
};

class InsufficientLibrary : public Error {
 public:
  using Error::Error;
};

class LibraryMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when a rollout of an identified model leaves the bounded region.
class Diverged : public Error {
 public:
  explicit Diverged(double time)
      : Error("identified model diverged at t=" + std::to_string(time)),
        time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace repsindy

#endif  // REPSINDY_ERRORS_HPP_
