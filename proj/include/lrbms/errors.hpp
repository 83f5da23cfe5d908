#pragma once

#include <stdexcept>
#include <string>

namespace lrbms {

// Bad user input (counts, ids, tolerances).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Data functions violating positivity or finiteness.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

class UnsupportedError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// The detailed operator failed to factorize as a positive definite matrix.
class CoercivityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
public:
  SingularSystemError(const std::string& what, int subdomain)
      : std::runtime_error(what), subdomain_(subdomain) {}
  int subdomain() const noexcept { return subdomain_; }

private:
  int subdomain_;
};

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lrbms
