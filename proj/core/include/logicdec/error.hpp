#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace logicdec {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Illegal character or malformed token in rule text.
class LexError : public Error {
 public:
  LexError(std::size_t line, std::size_t column, const std::string& what)
      : Error("lex error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Grammar violation while parsing rule text.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Duplicate, undefined or cyclic rule references.
class LinkError : public Error {
 public:
  using Error::Error;
};

/// Problems binding named sets at evaluation time (unbound set, empty domain).
class BindError : public Error {
 public:
  enum class Kind { UnboundSet, EmptyDomain, BadArity, UnknownRule };

  BindError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Vector lengths or vocabularies that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files (vocabulary, triples, snapshots, weights, instances).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace logicdec
