#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bitcipher {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: unreadable files, malformed formats, invalid flags.
/// The CLI maps this to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Requested more vectors than a b-bit cipher can hold.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must agree on a shape (vocabulary size, dimension) do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace bitcipher
