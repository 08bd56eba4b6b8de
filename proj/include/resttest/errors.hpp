#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resttest {

// Base of every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// oasmodel
class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnresolvedRef : public Error {
 public:
  explicit UnresolvedRef(std::string pointer)
      : Error("unresolved $ref: " + pointer), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// embedding
class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t line, std::size_t expected, std::size_t got)
      : Error("embedding line " + std::to_string(line) + ": expected " +
              std::to_string(expected) + " components, got " +
              std::to_string(got)),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyTable : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

// spdg
class UnknownOperation : public Error {
 public:
  using Error::Error;
};

class UnknownEdge : public Error {
 public:
  using Error::Error;
};

// agents
class NoActions : public Error {
 public:
  using Error::Error;
};

class UnknownStateAction : public Error {
 public:
  using Error::Error;
};

// valuesources
class LlmUnavailable : public Error {
 public:
  using Error::Error;
};

class MalformedLlmReply : public Error {
 public:
  using Error::Error;
};

// executor
class MissingPathParam : public Error {
 public:
  using Error::Error;
};

// persistence
class CacheWriteError : public Error {
 public:
  using Error::Error;
};

// reporting
class ReportWriteError : public Error {
 public:
  ReportWriteError(const std::string& message, std::vector<std::string> written)
      : Error(message), written_(std::move(written)) {}
  // Files that were completely written before the failure.
  const std::vector<std::string>& written() const { return written_; }

 private:
  std::vector<std::string> written_;
};

// cli
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration:";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }
  std::vector<std::string> violations_;
};

// sandbox
class PortInUse : public Error {
 public:
  using Error::Error;
};

}  // namespace resttest
