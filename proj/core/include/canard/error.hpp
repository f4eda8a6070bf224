#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canard {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 1-based line/column position inside expression or model source text.
struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string to_string(const SourcePos& pos);

class ParseError : public Error {
 public:
  ParseError(const std::string& message, SourcePos pos);
  const SourcePos& pos() const noexcept { return pos_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  SourcePos pos_;
  std::string detail_;
};

/// Evaluation failure: unbound identifiers, domain violations, non-finite results.
class EvalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public EvalError {
 public:
  using EvalError::EvalError;
};

/// Jets of different order, mode, or dimension combined in one operation.
class ShapeError : public EvalError {
 public:
  using EvalError::EvalError;
};

/// Ill-formed slow-fast model (bad declarations, unsupported dimension, bad parameters).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: Newton divergence, step-size underflow, singular systems.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace canard
