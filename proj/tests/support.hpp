#pragma once

#include <random>

#include "qfeyn/operator_core.hpp"

// Shared fixtures and generators for the test suites. The random streams
// here are independent of the library's problem builder on purpose.

namespace testsupport {

using qfeyn::Complex;
using qfeyn::ComplexMatrix;
using qfeyn::ComplexVector;
using qfeyn::Operator;
using qfeyn::StateVector;

inline Operator pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return Operator(m);
}

inline Operator pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return Operator(m);
}

inline Operator pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return Operator(m);
}

inline double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
}

inline ComplexMatrix random_matrix(Eigen::Index dim, std::mt19937_64& rng) {
  ComplexMatrix a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      a(r, c) = Complex(uniform_pm1(rng), uniform_pm1(rng));
    }
  }
  return a;
}

// Random self-adjoint operator scaled to the requested spectral norm.
inline Operator random_hermitian(Eigen::Index dim, std::mt19937_64& rng,
                                 double norm = 1.0) {
  ComplexMatrix a = random_matrix(dim, rng);
  ComplexMatrix h = 0.5 * (a + ComplexMatrix(a.adjoint()));
  const double actual = qfeyn::operator_norm(Operator(h));
  if (actual > 0.0) h *= norm / actual;
  return Operator(h);
}

inline StateVector random_state(Eigen::Index dim, std::mt19937_64& rng) {
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = Complex(uniform_pm1(rng), uniform_pm1(rng));
  }
  if (v.norm() == 0.0) v(0) = 1.0;
  v.normalize();
  return StateVector(v);
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testsupport
