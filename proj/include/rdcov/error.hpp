#pragma once

#include <stdexcept>
#include <string>

namespace rdcov {

//! Base class for all library errors. `code()` is a stable machine-readable
//! identifier used by the CLI.
class Error : public std::runtime_error
{
public:
  Error(std::string code, const std::string& what)
    : std::runtime_error(what)
    , code_(std::move(code))
  {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

// Input and configuration problems.
class ConfigError : public Error
{
public:
  explicit ConfigError(const std::string& what, std::string code = "config")
    : Error(std::move(code), what)
  {}
};

class SchemaError : public ConfigError
{
public:
  explicit SchemaError(const std::string& what)
    : ConfigError(what, "schema")
  {}
};

class ParseError : public ConfigError
{
public:
  explicit ParseError(const std::string& what)
    : ConfigError(what, "parse")
  {}
};

class EmptyDataError : public ConfigError
{
public:
  explicit EmptyDataError(const std::string& what)
    : ConfigError(what, "empty_data")
  {}
};

// Numerical failures.
class NumericError : public Error
{
public:
  explicit NumericError(const std::string& what, std::string code = "numeric")
    : Error(std::move(code), what)
  {}
};

class DomainError : public NumericError
{
public:
  explicit DomainError(const std::string& what)
    : NumericError(what, "domain")
  {}
};

class OneSidedError : public NumericError
{
public:
  explicit OneSidedError(const std::string& what)
    : NumericError(what, "one_sided")
  {}
};

class InsufficientDataError : public NumericError
{
public:
  explicit InsufficientDataError(const std::string& what)
    : NumericError(what, "insufficient_data")
  {}
};

class RankDeficientError : public NumericError
{
public:
  explicit RankDeficientError(const std::string& what)
    : NumericError(what, "rank_deficient")
  {}
};

class DegenerateError : public NumericError
{
public:
  explicit DegenerateError(const std::string& what)
    : NumericError(what, "degenerate")
  {}
};

} // namespace rdcov
