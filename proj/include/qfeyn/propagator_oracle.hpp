#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qfeyn/operator_core.hpp"

// Ground-truth exponentials. The spectral route (eigendecomposition of a
// self-adjoint generator) is the trusted propagator; the Taylor
// scaling-and-squaring route is an algebraically independent cross-check
// for exponentials of general bounded exponents.

namespace qfeyn {

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // ascending
  ComplexMatrix eigenvectors;   // unitary; column j pairs with eigenvalues[j]
};

// Rejects input whose hermitian_defect exceeds tol; the defect is quoted
// in the error message.
inline SpectralDecomposition hermitian_eigendecompose(const Operator& op,
                                                      double tol = kHermitianTol) {
  const double defect = hermitian_defect(op);
  if (!(defect <= tol)) {
    std::ostringstream msg;
    msg << "hermitian_eigendecompose: operator is not self-adjoint "
        << "(max asymmetry " << defect << ", tol " << tol << ")";
    throw std::invalid_argument(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(op.entries());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigendecompose: eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// U diag(f(lambda)) U* for a scalar function f of the real spectrum.
template <class Fn>
Operator spectral_map(const SpectralDecomposition& sd, Fn&& f) {
  const Eigen::Index d = sd.eigenvalues.size();
  ComplexVector fx(d);
  for (Eigen::Index i = 0; i < d; ++i) fx(i) = f(sd.eigenvalues(i));
  return Operator(sd.eigenvectors * fx.asDiagonal() * sd.eigenvectors.adjoint());
}

inline Operator stone_propagator(const SpectralDecomposition& sd, double t) {
  return spectral_map(sd, [t](double lam) {
    return std::exp(Complex(0.0, t * lam));
  });
}

// e^{itL} for self-adjoint L: unitary and a group in t.
inline Operator stone_propagator(const Operator& l, double t,
                                 double tol = kHermitianTol) {
  return stone_propagator(hermitian_eigendecompose(l, tol), t);
}

// e^A by scaling and squaring: halve A until its spectral norm is <= 0.5,
// sum the Taylor series to a 1e-16 relative term threshold, then square
// back. e^0 is the identity exactly.
inline Operator exp_bounded(const Operator& a) {
  const Eigen::Index d = a.dim();
  const double norm = operator_norm(a);
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const ComplexMatrix x = scale * a.entries();
  ComplexMatrix sum = ComplexMatrix::Identity(d, d);
  ComplexMatrix term = ComplexMatrix::Identity(d, d);
  for (int k = 1; k <= 64; ++k) {
    term = (term * x / double(k)).eval();
    sum += term;
    if (term.norm() < 1e-16 * sum.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return Operator(std::move(sum));
}

// (I + A/k)^k by binary powering; approaches exp_bounded(A) as k grows.
inline Operator euler_limit_exp(const Operator& a, long k) {
  if (k < 1) throw std::invalid_argument("euler_limit_exp: k must be >= 1");
  const Eigen::Index d = a.dim();
  ComplexMatrix base = ComplexMatrix::Identity(d, d) + a.entries() / double(k);
  ComplexMatrix result = ComplexMatrix::Identity(d, d);
  long e = k;
  while (e > 0) {
    if (e & 1) result = (result * base).eval();
    e >>= 1;
    if (e > 0) base = (base * base).eval();
  }
  return Operator(std::move(result));
}

}  // namespace qfeyn
