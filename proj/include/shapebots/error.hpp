#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapebots {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed document. `offset()` is the byte offset of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed input that uses a feature we deliberately do not implement.
class UnsupportedFeature : public Error {
 public:
  UnsupportedFeature(const std::string& feature, std::size_t offset)
      : Error("unsupported feature '" + feature + "' (at byte " + std::to_string(offset) + ")"),
        feature_(feature),
        offset_(offset) {}
  const std::string& feature() const noexcept { return feature_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string feature_;
  std::size_t offset_;
};

/// The request cannot be satisfied with the available robots/segments.
class Infeasible : public Error {
 public:
  using Error::Error;
};

class NotReady : public Error {
 public:
  using Error::Error;
};

/// Scenario or message document that violates its schema. `path()` is a JSON path.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace shapebots
