#pragma once

#include <Eigen/Dense>

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

// Dense complex linear algebra substrate: validated operator and state
// types plus the norms and self-adjointness checks everything else builds
// on. All values are immutable after construction and every function is
// pure, so the whole surface is safe to call concurrently.

namespace qfeyn {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Default entrywise tolerance wherever self-adjointness is required.
inline constexpr double kHermitianTol = 1e-10;

// Bounded linear operator on C^dim: square, finite entries, dim >= 1.
class Operator {
public:
  explicit Operator(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
      std::ostringstream msg;
      msg << "Operator: expected square entries with dim >= 1, got "
          << entries_.rows() << "x" << entries_.cols();
      throw std::invalid_argument(msg.str());
    }
    if (!entries_.allFinite()) {
      throw std::invalid_argument("Operator: entries must be finite");
    }
  }

  static Operator identity(Eigen::Index dim) {
    return Operator(ComplexMatrix::Identity(dim, dim));
  }

  static Operator zero(Eigen::Index dim) {
    return Operator(ComplexMatrix::Zero(dim, dim));
  }

  Eigen::Index dim() const { return entries_.rows(); }
  const ComplexMatrix& entries() const { return entries_; }

private:
  ComplexMatrix entries_;
};

// Element of C^dim: finite entries, dim >= 1.
class StateVector {
public:
  explicit StateVector(ComplexVector entries) : entries_(std::move(entries)) {
    if (entries_.size() < 1) {
      throw std::invalid_argument("StateVector: dim must be >= 1");
    }
    if (!entries_.allFinite()) {
      throw std::invalid_argument("StateVector: entries must be finite");
    }
  }

  Eigen::Index dim() const { return entries_.size(); }
  const ComplexVector& entries() const { return entries_; }
  double norm() const { return entries_.norm(); }

private:
  ComplexVector entries_;
};

// Matrix-vector action op * v.
inline StateVector apply(const Operator& op, const StateVector& v) {
  if (op.dim() != v.dim()) {
    std::ostringstream msg;
    msg << "apply: dimension mismatch, operator dim " << op.dim()
        << " vs vector dim " << v.dim();
    throw std::invalid_argument(msg.str());
  }
  return StateVector(op.entries() * v.entries());
}

inline Operator adjoint(const Operator& op) {
  return Operator(op.entries().adjoint());
}

// max_ij |A - A*|_ij, the distance from self-adjointness quoted in
// diagnostics throughout the library.
inline double hermitian_defect(const Operator& op) {
  return (op.entries() - op.entries().adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Operator& op, double tol = kHermitianTol) {
  if (tol < 0.0) throw std::invalid_argument("is_hermitian: tol must be >= 0");
  return hermitian_defect(op) <= tol;
}

struct AdjointCheck {
  Operator adjoint;
  bool hermitian;
};

inline AdjointCheck adjoint_and_hermitian_check(const Operator& op,
                                                double tol = kHermitianTol) {
  if (tol < 0.0) {
    throw std::invalid_argument("adjoint_and_hermitian_check: tol must be >= 0");
  }
  return {adjoint(op), hermitian_defect(op) <= tol};
}

// Spectral norm (largest singular value). Zero iff op is the zero operator.
inline double operator_norm(const Operator& op) {
  Eigen::JacobiSVD<ComplexMatrix> svd(op.entries());
  return svd.singularValues()(0);
}

}  // namespace qfeyn
