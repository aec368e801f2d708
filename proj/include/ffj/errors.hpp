#pragma once

#include <stdexcept>
#include <string>

#include "ffj/ast.hpp"

namespace ffj {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(SourceLocation loc, const std::string& message)
      : Error(to_string(loc) + ": " + message), location_(std::move(loc)) {}
  const SourceLocation& location() const { return location_; }

 private:
  SourceLocation location_;
};

class DuplicateMember : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownFeature : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateFeature : public ParseError {
 public:
  using ParseError::ParseError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A class/introduction/refinement table sanity condition failed. `condition`
/// is a stable identifier such as "duplicate-qualified-type" or "cycle".
class SanityViolation : public Error {
 public:
  SanityViolation(std::string condition, const std::string& message)
      : Error(condition + ": " + message), condition_(std::move(condition)) {}
  const std::string& condition() const { return condition_; }

 private:
  std::string condition_;
};

class UnknownClass : public Error {
 public:
  explicit UnknownClass(const std::string& cls) : Error("unknown class " + cls) {}
};

class FeatureNotInChain : public Error {
 public:
  FeatureNotInChain(const std::string& feature, const std::string& cls)
      : Error("feature " + feature + " does not introduce or refine " + cls) {}
};

class InvalidSelection : public Error {
 public:
  using Error::Error;
};

}  // namespace ffj
