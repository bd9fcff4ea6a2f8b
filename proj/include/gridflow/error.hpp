#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside a function's domain (e.g. evaluating past domain_end).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ReductionError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> best)
      : Error(what), best_point(std::move(best)) {}
  std::vector<double> best_point;
};

// Certificate: a certified lower bound > 0 on the slack-program optimum,
// i.e. no point satisfies every constraint.
struct InfeasibilityCertificate {
  double slack_lower_bound = 0.0;
  double slack_value = 0.0;
  double duality_gap = 0.0;
  std::vector<double> point;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, InfeasibilityCertificate cert)
      : Error(what), certificate(std::move(cert)) {}
  InfeasibilityCertificate certificate;
};

class NotStrictlyFeasibleError : public Error {
 public:
  NotStrictlyFeasibleError(const std::string& what, double last_eps)
      : Error(what), last_eps_prime(last_eps) {}
  double last_eps_prime;
};

class DegenerateInstanceError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& pointer, const std::string& msg)
      : Error(pointer + ": " + msg), location(pointer) {}
  std::string location;
};

// over_approximate refuses piece counts above its cap.
class PieceCountError : public ParameterError {
 public:
  PieceCountError(const std::string& what, long long k)
      : ParameterError(what), required_k(k) {}
  long long required_k;
};

}  // namespace gridflow
