#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfeyn/operator_core.hpp"
#include "qfeyn/propagator_oracle.hpp"

// Operator families S(t) on t >= 0 carrying a claimed generator, a numeric
// tangency verifier for them, and the assembly of weighted decompositions
// L = a_1 L_1 + ... + a_m L_m with the hypotheses every propagation scheme
// downstream relies on (self-adjoint L and S(t), real coefficient sum).

namespace qfeyn {

enum class FamilyKind { exact_exponential, linear, resolvent, quadratic, custom };

inline const char* family_kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::exact_exponential: return "exact_exponential";
    case FamilyKind::linear: return "linear";
    case FamilyKind::resolvent: return "resolvent";
    case FamilyKind::quadratic: return "quadratic";
    case FamilyKind::custom: return "custom";
  }
  return "unknown";
}

inline FamilyKind family_kind_from_name(const std::string& name) {
  if (name == "exact_exponential") return FamilyKind::exact_exponential;
  if (name == "linear") return FamilyKind::linear;
  if (name == "resolvent") return FamilyKind::resolvent;
  if (name == "quadratic") return FamilyKind::quadratic;
  if (name == "custom") return FamilyKind::custom;
  throw std::invalid_argument("unknown family kind '" + name + "'");
}

// A map t -> S(t) on [0, t_max] with a claimed generator. evaluator(0) must
// be the identity exactly. Built-in kinds come from make_family; hand-built
// (custom) families may wrap any evaluator, e.g. for diagnostics.
struct ChernoffFamily {
  std::string label;
  FamilyKind kind;
  Operator generator;  // the claimed L_k
  std::function<Operator(double)> evaluator;
  double t_max = std::numeric_limits<double>::infinity();

  Eigen::Index dim() const { return generator.dim(); }
  Operator operator()(double t) const { return evaluator(t); }
};

namespace detail {

inline void check_family_range(double t, double t_max, const char* label) {
  if (!(t >= 0.0) || t > t_max) {
    std::ostringstream msg;
    msg << label << " family: t = " << t << " outside [0, " << t_max << "]";
    throw std::out_of_range(msg.str());
  }
}

}  // namespace detail

// Built-in family kinds over a self-adjoint generator:
//   exact_exponential  S(t) = e^{tL}
//   linear             S(t) = I + tL
//   resolvent          S(t) = (I - tL)^{-1}, requires t_max * ||L|| <= 0.5
//   quadratic          S(t) = I + tL + t^2 L^2 / 2
// All four are self-adjoint-valued and first-order tangent to L.
inline ChernoffFamily make_family(FamilyKind kind, const Operator& generator,
                                  double t_max) {
  if (!(t_max > 0.0)) {
    throw std::invalid_argument("make_family: t_max must be positive");
  }
  const double defect = hermitian_defect(generator);
  if (defect > kHermitianTol) {
    std::ostringstream msg;
    msg << "make_family: generator is not self-adjoint (max asymmetry "
        << defect << ")";
    throw std::invalid_argument(msg.str());
  }

  const Eigen::Index d = generator.dim();
  const ComplexMatrix l = generator.entries();
  std::function<Operator(double)> evaluator;

  switch (kind) {
    case FamilyKind::linear:
      evaluator = [l, t_max, d](double t) {
        detail::check_family_range(t, t_max, "linear");
        if (t == 0.0) return Operator::identity(d);
        return Operator(ComplexMatrix::Identity(d, d) + t * l);
      };
      break;
    case FamilyKind::resolvent: {
      const double norm = operator_norm(generator);
      if (norm > 0.0 && t_max * norm > 0.5) {
        std::ostringstream msg;
        msg << "make_family: resolvent singularity risk, t_max * ||L|| = "
            << t_max * norm << " exceeds the 0.5 safety margin";
        throw std::invalid_argument(msg.str());
      }
      evaluator = [l, t_max, d](double t) {
        detail::check_family_range(t, t_max, "resolvent");
        if (t == 0.0) return Operator::identity(d);
        const ComplexMatrix shifted = ComplexMatrix::Identity(d, d) - t * l;
        return Operator(shifted.partialPivLu().inverse());
      };
      break;
    }
    case FamilyKind::quadratic: {
      const ComplexMatrix l2 = l * l;
      evaluator = [l, l2, t_max, d](double t) {
        detail::check_family_range(t, t_max, "quadratic");
        if (t == 0.0) return Operator::identity(d);
        return Operator(ComplexMatrix::Identity(d, d) + t * l +
                        (0.5 * t * t) * l2);
      };
      break;
    }
    case FamilyKind::exact_exponential: {
      const SpectralDecomposition sd = hermitian_eigendecompose(generator);
      evaluator = [sd, t_max, d](double t) {
        detail::check_family_range(t, t_max, "exact_exponential");
        if (t == 0.0) return Operator::identity(d);
        return spectral_map(sd, [t](double lam) {
          return Complex(std::exp(t * lam), 0.0);
        });
      };
      break;
    }
    case FamilyKind::custom:
      throw std::invalid_argument(
          "make_family: custom families are constructed directly, not via "
          "make_family");
  }

  return ChernoffFamily{family_kind_name(kind), kind, generator,
                        std::move(evaluator), t_max};
}

// Outcome of the numeric tangency check of a family against its claimed
// generator. residuals[i] is the worst first-difference defect
//   max_f || (S(t_i) f - f) / t_i  -  L f ||
// over the standard basis probes f. collective_bound is the largest
// sampled ||S(t)|| on [0, min(1, t_max)], the uniform constant the
// iteration bounds depend on.
struct TangencyReport {
  std::vector<double> t_grid;    // decreasing
  std::vector<double> residuals; // one per grid point actually evaluated
  double collective_bound = 0.0;
  bool hermitian_at_grid = false;
  bool ct2_pass = false;
  bool tangent = false;
  std::optional<double> failed_t;  // set when the evaluator threw
  std::string notes;
};

inline std::vector<double> default_tangency_grid(
    double t_max = std::numeric_limits<double>::infinity()) {
  std::vector<double> grid;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    if (t <= t_max) grid.push_back(t);
  }
  if (grid.empty()) grid.push_back(t_max);
  return grid;
}

// First-order families have residual of order t * ||L||^2, so the default
// acceptance threshold scales with the generator.
inline double default_tangency_tol(const Operator& generator) {
  const double norm = operator_norm(generator);
  return 1e-2 * (1.0 + norm * norm);
}

// Evaluates the family on a decreasing grid of positive times and decides
// tangency: the residual at the smallest grid point must fall below tol and
// S(0) must be the identity. Strong continuity of the evaluator and the
// closure condition are not independently testable here; see notes.
inline TangencyReport check_tangency(const ChernoffFamily& fam, double tol,
                                     std::span<const double> t_grid) {
  if (!(tol > 0.0)) throw std::invalid_argument("check_tangency: tol must be > 0");
  if (t_grid.empty()) throw std::invalid_argument("check_tangency: empty grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || t_grid[i] > fam.t_max) {
      throw std::invalid_argument(
          "check_tangency: grid points must lie in (0, t_max]");
    }
    if (i > 0 && !(t_grid[i] < t_grid[i - 1])) {
      throw std::invalid_argument("check_tangency: grid must be decreasing");
    }
  }

  const Eigen::Index d = fam.dim();
  TangencyReport report;
  report.t_grid.assign(t_grid.begin(), t_grid.end());
  report.notes =
      "CT1 (strong continuity) assumed: evaluators are continuous by "
      "construction. CT4 holds trivially at finite dimension.";

  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  const ComplexMatrix& l = fam.generator.entries();

  // CT2: S(0) = I, checked in operator norm against an exact identity.
  bool evaluator_ok = true;
  try {
    const Operator s0 = fam.evaluator(0.0);
    report.ct2_pass =
        operator_norm(Operator(s0.entries() - identity)) < 1e-14;
  } catch (const std::exception&) {
    report.failed_t = 0.0;
    evaluator_ok = false;
  }

  bool hermitian = true;
  double collective = evaluator_ok ? 1.0 : 0.0;  // includes S(0) = I
  if (evaluator_ok) {
    for (double t : t_grid) {
      Operator st = Operator::identity(d);
      try {
        st = fam.evaluator(t);
      } catch (const std::exception&) {
        report.failed_t = t;
        evaluator_ok = false;
        break;
      }
      hermitian = hermitian && (hermitian_defect(st) <= kHermitianTol);
      collective = std::max(collective, operator_norm(st));
      // Standard basis probes: column j of the defect matrix is the
      // residual vector for probe e_j.
      const ComplexMatrix defect = (st.entries() - identity) / t - l;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        worst = std::max(worst, defect.col(j).norm());
      }
      report.residuals.push_back(worst);
    }
  }

  // Uniform samples on [0, min(1, t_max)] for the collective bound.
  if (evaluator_ok) {
    const double hi = std::min(1.0, fam.t_max);
    const int samples = 17;
    try {
      for (int i = 1; i < samples; ++i) {
        const double t = hi * double(i) / double(samples - 1);
        collective = std::max(collective, operator_norm(fam.evaluator(t)));
      }
    } catch (const std::exception&) {
      // keep the grid-based bound; the grid itself already evaluated fine
    }
  }

  report.hermitian_at_grid = evaluator_ok && hermitian;
  report.collective_bound = collective;
  report.tangent =
      evaluator_ok && report.ct2_pass && report.residuals.back() < tol;
  return report;
}

inline TangencyReport check_tangency(const ChernoffFamily& fam) {
  const std::vector<double> grid = default_tangency_grid(fam.t_max);
  return check_tangency(fam, default_tangency_tol(fam.generator), grid);
}

// Raised when a decomposition violates one of the numbered hypotheses:
// 3 = assembled generator not self-adjoint, 4 = weighted family sum not
// self-adjoint at a sample time, 5 = coefficient sum not a real number.
class decomposition_error : public std::invalid_argument {
public:
  decomposition_error(int condition, const std::string& what)
      : std::invalid_argument(what), failed_condition_(condition) {}
  int failed_condition() const { return failed_condition_; }

private:
  int failed_condition_;
};

// Weighted decomposition L = a_1 L_1 + ... + a_m L_m with its families.
// Construction validates the hypotheses; instances are immutable.
class Decomposition {
public:
  Decomposition(std::vector<double> coefficients,
                std::vector<ChernoffFamily> families,
                std::span<const double> hermiticity_sample_ts = {})
      : coefficients_(std::move(coefficients)),
        families_(std::move(families)),
        generator_(Operator::identity(1)),
        hamiltonian_(Operator::identity(1)) {
    if (coefficients_.empty() || coefficients_.size() != families_.size()) {
      throw std::invalid_argument(
          "Decomposition: need m >= 1 coefficients matching the families");
    }
    const Eigen::Index d = families_.front().dim();
    t_max_ = families_.front().t_max;
    for (const ChernoffFamily& fam : families_) {
      if (fam.dim() != d) {
        throw std::invalid_argument("Decomposition: families must share one dim");
      }
      if (!fam.evaluator) {
        throw std::invalid_argument("Decomposition: family lacks an evaluator");
      }
      t_max_ = std::min(t_max_, fam.t_max);
    }
    coefficient_sum_ = 0.0;
    for (double a : coefficients_) {
      if (a == 0.0 || !std::isfinite(a)) {
        throw std::invalid_argument(
            "Decomposition: coefficients must be finite and non-zero");
      }
      coefficient_sum_ += a;
    }
    if (!std::isfinite(coefficient_sum_)) {
      throw decomposition_error(5, "condition 5: coefficient sum is not real");
    }

    ComplexMatrix l = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < families_.size(); ++k) {
      l += coefficients_[k] * families_[k].generator.entries();
    }
    generator_ = Operator(std::move(l));
    const double defect = hermitian_defect(generator_);
    if (defect > kHermitianTol) {
      std::ostringstream msg;
      msg << "condition 3: assembled generator is not self-adjoint "
          << "(max asymmetry " << defect << ")";
      throw decomposition_error(3, msg.str());
    }
    hamiltonian_ = Operator(-generator_.entries());

    std::vector<double> sample_ts(hermiticity_sample_ts.begin(),
                                  hermiticity_sample_ts.end());
    if (sample_ts.empty()) sample_ts = default_tangency_grid(t_max_);
    for (double t : sample_ts) {
      if (!(t >= 0.0) || t > t_max_) {
        throw std::invalid_argument(
            "Decomposition: hermiticity sample time outside [0, t_max]");
      }
      const Operator st = weighted_sum(t);
      const double st_defect = hermitian_defect(st);
      if (st_defect > kHermitianTol) {
        std::ostringstream msg;
        msg << "condition 4: weighted family sum is not self-adjoint at t = "
            << t << " (max asymmetry " << st_defect << ")";
        throw decomposition_error(4, msg.str());
      }
    }
  }

  const std::vector<double>& coefficients() const { return coefficients_; }
  const std::vector<ChernoffFamily>& families() const { return families_; }
  std::size_t term_count() const { return families_.size(); }
  Eigen::Index dim() const { return generator_.dim(); }

  // L, a, and -L of the decomposition.
  const Operator& generator() const { return generator_; }
  double coefficient_sum() const { return coefficient_sum_; }
  const Operator& hamiltonian() const { return hamiltonian_; }

  // Largest t every family accepts.
  double t_max() const { return t_max_; }

  // S(t) = sum_k a_k S_k(t).
  Operator weighted_sum(double t) const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim(), dim());
    for (std::size_t k = 0; k < families_.size(); ++k) {
      sum += coefficients_[k] * families_[k].evaluator(t).entries();
    }
    return Operator(std::move(sum));
  }

private:
  std::vector<double> coefficients_;
  std::vector<ChernoffFamily> families_;
  Operator generator_;
  Operator hamiltonian_;
  double coefficient_sum_ = 0.0;
  double t_max_ = std::numeric_limits<double>::infinity();
};

inline Decomposition assemble_decomposition(
    std::vector<double> coefficients, std::vector<ChernoffFamily> families,
    std::span<const double> hermiticity_sample_ts = {}) {
  return Decomposition(std::move(coefficients), std::move(families),
                       hermiticity_sample_ts);
}

}  // namespace qfeyn
