#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfeyn/chernoff_families.hpp"
#include "qfeyn/operator_core.hpp"
#include "qfeyn/propagator_oracle.hpp"

// Product-formula propagation for a decomposition L = sum_k a_k L_k with
// families S_k: the unitary one-step factor
//   R(t) = exp[ i (S(|t|) - a I) sign(t) ],
// its n-fold iteration, and the two expanded forms of the same limit: an
// exponential series and an Euler binomial, both written over the augmented
// multinomial sum with a_{m+1} = -a and S_{m+1} = I.

namespace qfeyn {

inline constexpr long kDefaultSeriesOrder = 25;
inline constexpr long kDefaultEulerPower = 4096;       // 2^12
inline constexpr long kDefaultTermCap = 531441;        // 3^12

enum class Variant { operator_exp, series, binomial };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::operator_exp: return "operator_exp";
    case Variant::series: return "series";
    case Variant::binomial: return "binomial";
  }
  return "unknown";
}

struct QuasiFeynmanConfig {
  long n = 1;                            // outer iteration count
  long truncation = kDefaultSeriesOrder; // series order j or Euler power p
  Variant variant = Variant::operator_exp;
  long term_cap = kDefaultTermCap;       // max literal multinomial leaves
};

// Raised when a literal multinomial enumeration would exceed the term cap.
class term_cap_error : public std::invalid_argument {
public:
  term_cap_error(std::uint64_t required, long cap)
      : std::invalid_argument(format(required, cap)), required_cap_(required) {}
  std::uint64_t required_cap() const { return required_cap_; }

private:
  static std::string format(std::uint64_t required, long cap) {
    std::ostringstream msg;
    msg << "multinomial term cap exceeded: need " << required
        << " index tuples, cap is " << cap;
    return msg.str();
  }
  std::uint64_t required_cap_;
};

namespace detail {

// (m+1)^p with saturation; true when the literal enumeration fits the cap.
inline bool literal_fits(std::size_t branches, long power, long cap,
                         std::uint64_t* required = nullptr) {
  std::uint64_t value = 1;
  bool saturated = false;
  for (long i = 0; i < power; ++i) {
    if (value > std::numeric_limits<std::uint64_t>::max() / branches) {
      value = std::numeric_limits<std::uint64_t>::max();
      saturated = true;
      break;
    }
    value *= branches;
  }
  if (required) *required = value;
  return !saturated && cap >= 0 && value <= std::uint64_t(cap);
}

// The augmented term list of a decomposition at a fixed family argument s:
// factors S_1(s)..S_m(s), I and weights a_1..a_m, -a.
struct AugmentedSum {
  std::vector<ComplexMatrix> factors;
  std::vector<double> weights;
  Eigen::Index dim = 0;

  // B = S(s) - a I = sum_k weights[k] factors[k].
  ComplexMatrix weighted_sum() const {
    ComplexMatrix b = ComplexMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < factors.size(); ++k) {
      b += weights[k] * factors[k];
    }
    return b;
  }
};

inline AugmentedSum make_augmented(const Decomposition& dec, double s) {
  AugmentedSum aug;
  aug.dim = dec.dim();
  for (std::size_t k = 0; k < dec.term_count(); ++k) {
    aug.factors.push_back(dec.families()[k].evaluator(s).entries());
    aug.weights.push_back(dec.coefficients()[k]);
  }
  aug.factors.push_back(ComplexMatrix::Identity(aug.dim, aug.dim));
  aug.weights.push_back(-dec.coefficient_sum());
  return aug;
}

// Depth-first enumeration of all (m+1)^remaining weighted compositions,
// applied right-to-left to the partial vector v and accumulated into acc.
inline void multinomial_accumulate(const AugmentedSum& aug, long remaining,
                                   const ComplexVector& v, ComplexVector& acc) {
  if (remaining == 0) {
    acc += v;
    return;
  }
  const std::size_t terms = aug.factors.size();
  for (std::size_t k = 0; k < terms; ++k) {
    // the trailing augmented factor is the identity; skip its multiply
    ComplexVector next = (k + 1 == terms)
                             ? ComplexVector(aug.weights[k] * v)
                             : ComplexVector(aug.weights[k] * (aug.factors[k] * v));
    multinomial_accumulate(aug, remaining - 1, next, acc);
  }
}

inline ComplexVector multinomial_literal(const AugmentedSum& aug, long power,
                                         const ComplexVector& f) {
  ComplexVector acc = ComplexVector::Zero(f.size());
  multinomial_accumulate(aug, power, f, acc);
  return acc;
}

inline double sign_of(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

inline void check_iteration_args(const Decomposition& dec, double t, long n,
                                 const StateVector& f, const char* where) {
  if (n < 1) {
    throw std::invalid_argument(std::string(where) + ": n must be >= 1");
  }
  if (f.dim() != dec.dim()) {
    throw std::invalid_argument(std::string(where) +
                                ": state dim does not match decomposition");
  }
  const double s = std::abs(t) / double(n);
  if (!(s <= dec.t_max())) {
    std::ostringstream msg;
    msg << where << ": |t|/n = " << s << " exceeds the family range t_max = "
        << dec.t_max();
    throw std::out_of_range(msg.str());
  }
}

// sum_{p > j} x^p / p! for x >= 0.
inline double exp_series_tail(double x, long j) {
  double term = 1.0;
  for (long p = 1; p <= j; ++p) term *= x / double(p);
  double tail = 0.0;
  for (long p = j + 1; p < j + 10000; ++p) {
    term *= x / double(p);
    tail += term;
    if (term <= 1e-18 * tail + std::numeric_limits<double>::denorm_min()) break;
  }
  return tail;
}

}  // namespace detail

// The one-step factor R(t) = exp[i (S(|t|) - a I) sign(t)]. Unitary whenever
// the decomposition hypotheses hold, with R(0) = I (sign(0) := 0) and
// R(-t) = R(t)^{-1}.
inline Operator step_operator(const Decomposition& dec, double t) {
  const double s = std::abs(t);
  if (!(s <= dec.t_max())) {
    std::ostringstream msg;
    msg << "step_operator: |t| = " << s << " exceeds the family range t_max = "
        << dec.t_max();
    throw std::out_of_range(msg.str());
  }
  if (t == 0.0) return Operator::identity(dec.dim());
  const double sgn = detail::sign_of(t);
  const ComplexMatrix exponent =
      Complex(0.0, sgn) *
      (dec.weighted_sum(s).entries() -
       dec.coefficient_sum() * ComplexMatrix::Identity(dec.dim(), dec.dim()));
  return exp_bounded(Operator(exponent));
}

// (R(t/n))^n f: one exponential, then n matrix-vector applications.
inline StateVector chernoff_iterate(const Decomposition& dec, double t, long n,
                                    const StateVector& f) {
  detail::check_iteration_args(dec, t, n, f, "chernoff_iterate");
  const Operator r = step_operator(dec, t / double(n));
  ComplexVector v = f.entries();
  for (long i = 0; i < n; ++i) v = r.entries() * v;
  return StateVector(std::move(v));
}

// (sum_{k=1}^{m+1} a_k S_k(|t|/n))^p f along two routes: the literal nested
// sum over all (m+1)^p index tuples and the closed power of the assembled
// operator B = S(|t|/n) - a I. The two agree up to roundoff and cross-check
// each other.
struct MultinomialPower {
  StateVector literal;
  StateVector closed;
};

inline MultinomialPower multinomial_power(const Decomposition& dec, double t,
                                          long n, long p, const StateVector& f,
                                          long term_cap = kDefaultTermCap) {
  if (p < 0) throw std::invalid_argument("multinomial_power: p must be >= 0");
  detail::check_iteration_args(dec, t, n, f, "multinomial_power");
  std::uint64_t required = 0;
  if (!detail::literal_fits(dec.term_count() + 1, p, term_cap, &required)) {
    throw term_cap_error(required, term_cap);
  }
  const detail::AugmentedSum aug =
      detail::make_augmented(dec, std::abs(t) / double(n));
  ComplexVector literal = detail::multinomial_literal(aug, p, f.entries());
  const ComplexMatrix b = aug.weighted_sum();
  ComplexVector closed = f.entries();
  for (long i = 0; i < p; ++i) closed = b * closed;
  return {StateVector(std::move(literal)), StateVector(std::move(closed))};
}

// Truncated exponential-series form at fixed n:
//   sum_{p=0}^{j} ((i n sign(t))^p / p!) (sum_k a_k S_k(|t|/n))^p f.
// Uses the literal nested-sum route while (m+1)^j fits the term cap, the
// closed route otherwise (literal_path records which). tail_bound is the
// a-priori remainder sum_{p>j} (n ||B||)^p / p! * ||f||.
struct SeriesResult {
  StateVector value;
  double tail_bound;
  bool literal_path;
};

inline SeriesResult series_formula(const Decomposition& dec, double t, long n,
                                   long j, const StateVector& f,
                                   long term_cap = kDefaultTermCap) {
  if (j < 0) throw std::invalid_argument("series_formula: j must be >= 0");
  detail::check_iteration_args(dec, t, n, f, "series_formula");
  const detail::AugmentedSum aug =
      detail::make_augmented(dec, std::abs(t) / double(n));
  const Complex z(0.0, double(n) * detail::sign_of(t));
  const bool literal = detail::literal_fits(dec.term_count() + 1, j, term_cap);

  ComplexVector acc = f.entries();
  if (literal) {
    Complex c = 1.0;
    for (long p = 1; p <= j; ++p) {
      c *= z / double(p);
      acc += c * detail::multinomial_literal(aug, p, f.entries());
    }
  } else {
    const ComplexMatrix b = aug.weighted_sum();
    // fold the coefficient into the running term so neither factor overflows
    ComplexVector term = f.entries();
    for (long p = 1; p <= j; ++p) {
      term = (z / double(p)) * (b * term);
      acc += term;
    }
  }

  const double x = double(n) * operator_norm(Operator(aug.weighted_sum()));
  const double tail = detail::exp_series_tail(x, j) * f.norm();
  return {StateVector(std::move(acc)), tail, literal};
}

// Euler binomial form at fixed n: with A = i n sign(t) (S(|t|/n) - a I),
//   p! sum_{d=0}^{p} ((i n sign(t))^d / (p^d d! (p-d)!)) (sum_k a_k S_k)^d f
// which telescopes to ((I + A/p)^p) f. Coefficients follow the recurrence
// c_{d+1} = c_d * i n sign(t) * (p-d) / (p (d+1)); no factorial is formed.
struct BinomialResult {
  StateVector value;
  bool literal_path;
};

inline BinomialResult binomial_formula(const Decomposition& dec, double t,
                                       long n, long p, const StateVector& f,
                                       long term_cap = kDefaultTermCap) {
  if (p < 1) throw std::invalid_argument("binomial_formula: p must be >= 1");
  detail::check_iteration_args(dec, t, n, f, "binomial_formula");
  const detail::AugmentedSum aug =
      detail::make_augmented(dec, std::abs(t) / double(n));
  const Complex z(0.0, double(n) * detail::sign_of(t));
  const bool literal = detail::literal_fits(dec.term_count() + 1, p, term_cap);

  ComplexVector acc = f.entries();
  if (literal) {
    Complex c = 1.0;
    for (long d = 1; d <= p; ++d) {
      c *= z * double(p - d + 1) / (double(p) * double(d));
      acc += c * detail::multinomial_literal(aug, d, f.entries());
    }
  } else {
    const ComplexMatrix b = aug.weighted_sum();
    ComplexVector term = f.entries();
    for (long d = 1; d <= p; ++d) {
      term = (z * double(p - d + 1) / (double(p) * double(d))) * (b * term);
      acc += term;
    }
  }
  return {StateVector(std::move(acc)), literal};
}

// One solve of the Cauchy problem i psi' = H psi with H = -L: dispatches to
// the configured variant and reports the defect against the spectral oracle
// e^{itL} psi0 plus the norm drift.
struct SolveReport {
  StateVector state;
  double oracle_residual = 0.0;
  double norm_drift = 0.0;
  bool literal_path = false;       // series / binomial metadata
  double series_tail_bound = 0.0;  // series only
};

inline SolveReport solve_schrodinger(const Decomposition& dec,
                                     const StateVector& psi0, double t,
                                     const QuasiFeynmanConfig& cfg) {
  SolveReport report{psi0, 0.0, 0.0, false, 0.0};
  switch (cfg.variant) {
    case Variant::operator_exp:
      report.state = chernoff_iterate(dec, t, cfg.n, psi0);
      break;
    case Variant::series: {
      SeriesResult r =
          series_formula(dec, t, cfg.n, cfg.truncation, psi0, cfg.term_cap);
      report.state = std::move(r.value);
      report.literal_path = r.literal_path;
      report.series_tail_bound = r.tail_bound;
      break;
    }
    case Variant::binomial: {
      BinomialResult r =
          binomial_formula(dec, t, cfg.n, cfg.truncation, psi0, cfg.term_cap);
      report.state = std::move(r.value);
      report.literal_path = r.literal_path;
      break;
    }
  }
  const StateVector exact = apply(stone_propagator(dec.generator(), t), psi0);
  report.oracle_residual = (report.state.entries() - exact.entries()).norm();
  report.norm_drift = std::abs(report.state.norm() - psi0.norm());
  return report;
}

}  // namespace qfeyn
