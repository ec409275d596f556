#pragma once

#include <stdexcept>
#include <string>

namespace rigidflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thermodynamic state outside the domain of the equation of state.
class DomainError : public Error {
 public:
  using Error::Error;
};

class RegionError : public Error {
 public:
  RegionError(const std::string& what, double p, double s, double p_min, double p_max,
              double s_min, double s_max)
      : Error(what), p(p), s(s), p_min(p_min), p_max(p_max), s_min(s_min), s_max(s_max) {}
  double p, s;
  double p_min, p_max, s_min, s_max;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  StepSizeError(const std::string& what, double dt, double dt_max)
      : Error(what), dt(dt), dt_max(dt_max) {}
  double dt, dt_max;
};

class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

class ContinuityError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, int iterations, double last_distance)
      : Error(what), iterations(iterations), last_distance(last_distance) {}
  int iterations;
  double last_distance;
};

class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line) : Error(what), line(line) {}
  int line;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A failure inside the time loop, tagged with where it happened.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double t, long step) : Error(what), t(t), step(step) {}
  double t;
  long step;
};

}  // namespace rigidflow
