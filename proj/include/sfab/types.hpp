#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sfab {

using Index = Eigen::Index;
using cplx = std::complex<double>;

// All Krylov-side arithmetic is complex: quadrature nodes and sketched Ritz
// values can be complex even when A is real.
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

enum class ErrorKind {
  Config,     // bad user input or configuration
  Dimension,  // operand shapes do not match
  Parse,      // malformed input file
  Io,         // file could not be opened or written
  Solver,     // numerical failure inside a method
  Internal,   // violated internal invariant (e.g. determinism)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::Dimension, what);
}

}  // namespace sfab
