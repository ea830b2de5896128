#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace l1rom {

using Index = Eigen::Index;
using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised by the QR solver when a diagonal entry of R is below the
/// rank threshold; callers may repair the matrix and retry.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

/// Simplex pivot cap exceeded.
class Stalled : public Error {
 public:
  using Error::Error;
};

class NewtonDiverged : public Error {
 public:
  using Error::Error;
};

/// Non-positive density or pressure handed to an Euler flux.
class NonPhysicalState : public Error {
 public:
  using Error::Error;
};

class DegenerateDictionary : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

inline bool all_finite(const DenseVector& v) { return v.allFinite(); }

}  // namespace l1rom
