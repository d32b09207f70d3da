#ifndef REPLAY_ERRORS_H_
#define REPLAY_ERRORS_H_

#include <stdexcept>
#include <string>

namespace replay {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (length mismatch, bad shape).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. The message carries "file:line: ".
class ParseError : public Error {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

// Well-formed input that violates a semantic rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unknown names, empty rosters, impossible split requests.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A solution concept does not apply to the given game.
class InapplicableError : public Error {
 public:
  using Error::Error;
};

// A solver failed to reach its residual target.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Ratio with a zero denominator.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace replay

#endif  // REPLAY_ERRORS_H_
