#pragma once

#include <stdexcept>
#include <string>

namespace kd {

//! Root of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! An argument value is outside its admissible range (h <= 0, p not in (0,1), ...).
class ParameterError : public Error
{
public:
  using Error::Error;
};

//! A function was evaluated outside its mathematical domain.
class DomainError : public Error
{
public:
  using Error::Error;
};

//! An object failed its construction-time invariant checks.
class ConstructionError : public Error
{
public:
  using Error::Error;
};

//! The requested quantity does not exist for the given inputs.
class NoSolutionError : public Error
{
public:
  using Error::Error;
};

//! A linear program (or other constraint system) has no feasible point.
class InfeasibleError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class OrderingError : public Error
{
public:
  using Error::Error;
};

class NumericalError : public Error
{
public:
  using Error::Error;
};

} // namespace kd
