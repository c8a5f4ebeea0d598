#ifndef ROBUSTNET_ERRORS_H_
#define ROBUSTNET_ERRORS_H_

#include <stdexcept>
#include <string>

namespace robustnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instances, templates, reservations or solutions.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A caller passed an out-of-range parameter (k <= 0, bad mode, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown or an unexpected solver status.
class SolverError : public Error {
 public:
  using Error::Error;
};

// A size guard refused the request; the message names the guard.
class RefusedError : public Error {
 public:
  using Error::Error;
};

// Random instance generation or certification gave up.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// No feasible solution exists (e.g. source and sink are disconnected).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace robustnet

#endif  // ROBUSTNET_ERRORS_H_
