#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ortus {

// 1-based line/column inside a source text.
struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

inline std::string to_string(const SourcePos& pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LexError : public Error {
 public:
  LexError(SourcePos pos, const std::string& msg)
      : Error(to_string(pos) + ": " + msg), pos_(pos) {}
  const SourcePos& pos() const { return pos_; }

 private:
  SourcePos pos_;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& msg,
             std::vector<std::string> expected = {})
      : Error(format(pos, msg, expected)), pos_(pos),
        expected_(std::move(expected)) {}

  const SourcePos& pos() const { return pos_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(SourcePos pos, const std::string& msg,
                            const std::vector<std::string>& expected) {
    std::string out = to_string(pos) + ": " + msg;
    if (!expected.empty()) {
      out += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) out += i + 1 == expected.size() ? " or " : ", ";
        out += expected[i];
      }
      out += ")";
    }
    return out;
  }

  SourcePos pos_;
  std::vector<std::string> expected_;
};

// A relationship block appeared before an element block.
class OrderError : public ParseError {
 public:
  using ParseError::ParseError;
};

class BuildError : public Error {
 public:
  enum class Kind { InvalidSpec, SciCapExceeded, UnsatisfiableRelationship };

  BuildError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed protocol file or unresolvable protocol reference.
class ProtocolError : public Error {
 public:
  ProtocolError(std::size_t line, const std::string& msg)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ortus
