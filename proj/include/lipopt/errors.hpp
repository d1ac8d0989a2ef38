#pragma once

#include <stdexcept>
#include <string>

namespace lipopt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

/// Shapes or vector lengths that do not fit together.
class DimensionError : public Error {
  public:
    using Error::Error;
};

class DuplicateEntryError : public Error {
  public:
    using Error::Error;
};

/// An argument outside the domain an operation accepts (r > width, u < l, d > 3, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Term caps, vertex caps and similar sizing limits.
class ResourceLimitError : public Error {
  public:
    using Error::Error;
};

class DisconnectedNetworkError : public Error {
  public:
    using Error::Error;
};

} // namespace lipopt
