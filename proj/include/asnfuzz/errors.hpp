#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asnfuzz {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PathNotFound : public Error {
 public:
  PathNotFound(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  // 1-based index of the first step that failed to resolve.
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string token,
             const std::string& message)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message + " (at '" + token +
              "')"),
        line_(line),
        column_(column),
        token_(std::move(token)) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& token() const { return token_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

class UnsupportedConstruct : public Error {
 public:
  explicit UnsupportedConstruct(std::string construct)
      : Error("unsupported construct: " + construct),
        construct_(std::move(construct)) {}
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

class ExtractError : public Error {
 public:
  enum class Kind { UnbalancedTags, NoBlocksFound };
  ExtractError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class EncodeError : public Error {
 public:
  enum class Kind { NonConformingValue, UnsupportedLength, UnknownType };
  EncodeError(Kind kind, std::string path, const std::string& message)
      : Error(message + (path.empty() ? "" : " at " + path)),
        kind_(kind),
        path_(std::move(path)) {}
  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  Kind kind_;
  std::string path_;
};

class DecodeError : public Error {
 public:
  DecodeError(std::size_t bit_offset, std::string reason)
      : Error("decode error at bit " + std::to_string(bit_offset) + ": " +
              reason),
        offset_(bit_offset),
        reason_(std::move(reason)) {}
  std::size_t bit_offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

class InvalidMutation : public Error {
 public:
  InvalidMutation(std::size_t record_index, std::string reason)
      : Error("mutation record " + std::to_string(record_index) + ": " +
              reason),
        index_(record_index),
        reason_(std::move(reason)) {}
  std::size_t record_index() const { return index_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t index_;
  std::string reason_;
};

class NoEligibleTarget : public Error {
 public:
  using Error::Error;
};

class DecodeFailed : public Error {
 public:
  using Error::Error;
};

class ManglerFailed : public Error {
 public:
  using Error::Error;
};

class TargetUnreachable : public Error {
 public:
  using Error::Error;
};

class CorpusWriteError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace asnfuzz
