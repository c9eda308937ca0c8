#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfeyn/chernoff_families.hpp"
#include "qfeyn/operator_core.hpp"
#include "qfeyn/propagator_oracle.hpp"
#include "qfeyn/quasi_feynman.hpp"

// Rival product-formula schemes for head-to-head convergence studies, plus
// the sampled Chernoff-equivalence distance between two families.

namespace qfeyn {

// A map t -> bounded operator with no claimed generator; the common face of
// everything chernoff_distance and bss_product compose. two_sided marks
// families that are also defined for negative arguments.
struct AbstractFamily {
  std::string label;
  std::function<Operator(double)> evaluator;
  double t_max = std::numeric_limits<double>::infinity();
  bool two_sided = false;

  Operator operator()(double t) const { return evaluator(t); }
};

// t -> e^{itH} for self-adjoint H; defined on all of R.
inline AbstractFamily stone_family(const Operator& h) {
  const SpectralDecomposition sd = hermitian_eigendecompose(h);
  const Eigen::Index d = h.dim();
  return {"stone(" + std::to_string(d) + ")",
          [sd, d](double t) {
            if (t == 0.0) return Operator::identity(d);
            return stone_propagator(sd, t);
          },
          std::numeric_limits<double>::infinity(), true};
}

// t -> R(t) of a decomposition; defined for |t| <= t_max.
inline AbstractFamily step_family(const Decomposition& dec) {
  return {"step", [dec](double t) { return step_operator(dec, t); },
          dec.t_max(), true};
}

inline AbstractFamily family_from_chernoff(const ChernoffFamily& fam) {
  return {fam.label, fam.evaluator, fam.t_max, false};
}

// First-order approximants of the unitary group e^{itH} for self-adjoint H,
// one per family kind:
//   exact_exponential  e^{itH}          linear     I + itH
//   resolvent          (I - itH)^{-1}   quadratic  I + itH - t^2 H^2 / 2
// None is self-adjoint-valued; only the exact kind is unitary, and it is
// the only one marked two_sided.
inline AbstractFamily unitary_approximant_family(FamilyKind kind,
                                                 const Operator& h) {
  const double defect = hermitian_defect(h);
  if (defect > kHermitianTol) {
    std::ostringstream msg;
    msg << "unitary_approximant_family: generator is not self-adjoint "
        << "(max asymmetry " << defect << ")";
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Index d = h.dim();
  const ComplexMatrix ih = Complex(0.0, 1.0) * h.entries();
  const std::string label = std::string(family_kind_name(kind)) + "(i*H)";
  switch (kind) {
    case FamilyKind::exact_exponential:
      return stone_family(h);
    case FamilyKind::linear:
      return {label,
              [ih, d](double t) {
                if (t == 0.0) return Operator::identity(d);
                return Operator(ComplexMatrix::Identity(d, d) + t * ih);
              },
              std::numeric_limits<double>::infinity(), false};
    case FamilyKind::resolvent:
      // I - itH is invertible for every real t, so no range restriction
      return {label,
              [ih, d](double t) {
                if (t == 0.0) return Operator::identity(d);
                const ComplexMatrix shifted =
                    ComplexMatrix::Identity(d, d) - t * ih;
                return Operator(shifted.partialPivLu().inverse());
              },
              std::numeric_limits<double>::infinity(), false};
    case FamilyKind::quadratic: {
      const ComplexMatrix ih2 = ih * ih;
      return {label,
              [ih, ih2, d](double t) {
                if (t == 0.0) return Operator::identity(d);
                return Operator(ComplexMatrix::Identity(d, d) + t * ih +
                                (0.5 * t * t) * ih2);
              },
              std::numeric_limits<double>::infinity(), false};
    }
    case FamilyKind::custom:
      throw std::invalid_argument(
          "unitary_approximant_family: no built-in custom realization");
  }
  throw std::invalid_argument("unitary_approximant_family: unknown kind");
}

// Splitting product (e^{i t a_1 L_1 / n} o ... o e^{i t a_m L_m / n})^n f.
// Every factor is unitary, so the norm of f is preserved.
inline StateVector trotter_product(const Decomposition& dec, double t, long n,
                                   const StateVector& f) {
  if (n < 1) throw std::invalid_argument("trotter_product: n must be >= 1");
  if (f.dim() != dec.dim()) {
    throw std::invalid_argument(
        "trotter_product: state dim does not match decomposition");
  }
  const double s = t / double(n);
  ComplexMatrix sweep = ComplexMatrix::Identity(dec.dim(), dec.dim());
  for (std::size_t k = 0; k < dec.term_count(); ++k) {
    const Operator scaled(dec.coefficients()[k] *
                          dec.families()[k].generator.entries());
    sweep = (sweep * stone_propagator(scaled, s).entries()).eval();
  }
  ComplexVector v = f.entries();
  for (long i = 0; i < n; ++i) v = sweep * v;
  return StateVector(std::move(v));
}

// Sequential family composition (S_1(t/n) o ... o S_m(t/n))^n f for families
// tangent to i a_k L_k. Norm preservation is not guaranteed; callers should
// watch the drift.
inline StateVector bss_product(std::span<const AbstractFamily> families,
                               double t, long n, const StateVector& f) {
  if (families.empty()) {
    throw std::invalid_argument("bss_product: need at least one family");
  }
  if (n < 1) throw std::invalid_argument("bss_product: n must be >= 1");
  const double s = t / double(n);
  for (const AbstractFamily& fam : families) {
    if (std::abs(s) > fam.t_max || (s < 0.0 && !fam.two_sided)) {
      std::ostringstream msg;
      msg << "bss_product: family '" << fam.label
          << "' is not defined at t/n = " << s;
      throw std::out_of_range(msg.str());
    }
  }
  ComplexMatrix sweep = families.front().evaluator(s).entries();
  if (sweep.rows() != f.dim()) {
    throw std::invalid_argument("bss_product: state dim does not match families");
  }
  for (std::size_t k = 1; k < families.size(); ++k) {
    const ComplexMatrix factor = families[k].evaluator(s).entries();
    if (factor.rows() != sweep.rows()) {
      throw std::invalid_argument("bss_product: families must share one dim");
    }
    sweep = (sweep * factor).eval();
  }
  ComplexVector v = f.entries();
  for (long i = 0; i < n; ++i) v = sweep * v;
  return StateVector(std::move(v));
}

// Sampled Chernoff-equivalence distance
//   max_t || (G1(t/n))^n f - (G2(t/n))^n f ||
// over a uniform grid of grid_size points spanning [0, T], or [-T, T] when
// both families are two-sided. A grid max is a lower bound on the true sup.
inline double chernoff_distance(const AbstractFamily& g1,
                                const AbstractFamily& g2, const StateVector& f,
                                double T, long n, long grid_size) {
  if (!(T > 0.0)) throw std::invalid_argument("chernoff_distance: T must be > 0");
  if (n < 1) throw std::invalid_argument("chernoff_distance: n must be >= 1");
  if (grid_size < 2) {
    throw std::invalid_argument("chernoff_distance: grid_size must be >= 2");
  }
  const bool two_sided = g1.two_sided && g2.two_sided;
  const double lo = two_sided ? -T : 0.0;

  const auto powered = [&](const AbstractFamily& g, double u) {
    if (std::abs(u) > g.t_max) {
      std::ostringstream msg;
      msg << "chernoff_distance: family '" << g.label
          << "' is not defined at t/n = " << u;
      throw std::out_of_range(msg.str());
    }
    const ComplexMatrix factor = g.evaluator(u).entries();
    if (factor.rows() != f.dim()) {
      throw std::invalid_argument(
          "chernoff_distance: state dim does not match families");
    }
    ComplexVector v = f.entries();
    for (long i = 0; i < n; ++i) v = factor * v;
    return v;
  };

  double worst = 0.0;
  for (long i = 0; i < grid_size; ++i) {
    const double t = lo + (T - lo) * double(i) / double(grid_size - 1);
    const double u = t / double(n);
    worst = std::max(worst, (powered(g1, u) - powered(g2, u)).norm());
  }
  return worst;
}

// Single-family convenience: the m = 1 decomposition with coefficient a,
// iterated exactly as chernoff_iterate would.
inline StateVector single_term_iterate(const ChernoffFamily& fam, double a,
                                       double t, long n, const StateVector& f) {
  const Decomposition dec({a}, {fam});
  return chernoff_iterate(dec, t, n, f);
}

}  // namespace qfeyn
