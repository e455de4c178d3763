#pragma once

#include <stdexcept>
#include <string>

namespace fmad {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// Power-law fit with fewer than two usable bands.
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

// Training data containing only one of the two classes.
class SingleClassError : public Error {
 public:
  using Error::Error;
};

// Region box with zero area after margin and clamping.
class DegenerateRegionError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace fmad
