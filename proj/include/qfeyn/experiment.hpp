#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qfeyn/baselines.hpp"
#include "qfeyn/chernoff_families.hpp"
#include "qfeyn/quasi_feynman.hpp"

// Reproducibility harness: structured sweep configs, deterministic model
// problems, method x n convergence sweeps with CSV persistence, and
// least-squares convergence-order fits.

namespace qfeyn {

enum class ProblemKind { pauli, random_hermitian, laplacian_plus_potential };

inline const char* problem_kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::pauli: return "pauli";
    case ProblemKind::random_hermitian: return "random_hermitian";
    case ProblemKind::laplacian_plus_potential: return "laplacian_plus_potential";
  }
  return "unknown";
}

inline ProblemKind problem_kind_from_name(const std::string& name) {
  if (name == "pauli") return ProblemKind::pauli;
  if (name == "random_hermitian") return ProblemKind::random_hermitian;
  if (name == "laplacian_plus_potential") return ProblemKind::laplacian_plus_potential;
  throw std::invalid_argument("config: unknown problem kind '" + name + "'");
}

enum class Method { qf_exp, qf_series, qf_binomial, trotter, bss };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::qf_exp: return "qf_exp";
    case Method::qf_series: return "qf_series";
    case Method::qf_binomial: return "qf_binomial";
    case Method::trotter: return "trotter";
    case Method::bss: return "bss";
  }
  return "unknown";
}

inline Method method_from_name(const std::string& name) {
  if (name == "qf_exp") return Method::qf_exp;
  if (name == "qf_series") return Method::qf_series;
  if (name == "qf_binomial") return Method::qf_binomial;
  if (name == "trotter") return Method::trotter;
  if (name == "bss") return Method::bss;
  throw std::invalid_argument("config: unknown method '" + name + "'");
}

struct SweepConfig {
  struct Problem {
    Eigen::Index dim = 2;
    ProblemKind kind = ProblemKind::pauli;
    std::uint64_t seed = 0;
    std::vector<double> potential;  // laplacian_plus_potential only
  };
  struct Terms {
    std::vector<double> coefficients;
    std::vector<FamilyKind> family_kinds;
  };
  struct Sweep {
    double t = 1.0;
    std::vector<long> n_values;
    std::vector<Method> methods;
  };
  struct Formula {
    long series_j = kDefaultSeriesOrder;
    long binomial_p = kDefaultEulerPower;
    long term_cap = kDefaultTermCap;
  };
  struct Output {
    std::string csv_path;
  };

  Problem problem;
  Terms decomposition;
  Sweep sweep;
  Formula formula;
  Output output;
};

namespace detail {

// Unknown keys are rejected so config typos fail loudly.
inline void expect_object_keys(const nlohmann::json& node, const char* where,
                               std::initializer_list<const char*> allowed) {
  if (!node.is_object()) {
    throw std::invalid_argument(std::string("config: '") + where +
                                "' must be an object");
  }
  for (auto it = node.begin(); it != node.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(std::string("config: unknown key '") +
                                  it.key() + "' in " + where);
    }
  }
}

inline const nlohmann::json& require_key(const nlohmann::json& node,
                                         const char* where, const char* key) {
  if (!node.contains(key)) {
    throw std::invalid_argument(std::string("config: missing key '") + key +
                                "' in " + where);
  }
  return node.at(key);
}

inline double uniform_pm1(std::mt19937_64& rng) {
  // 53 uniform bits; stdlib distributions are avoided so the stream is
  // identical across standard library implementations
  return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
}

inline Operator random_hermitian_unit(Eigen::Index dim, std::mt19937_64& rng) {
  ComplexMatrix a(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      a(r, c) = Complex(uniform_pm1(rng), uniform_pm1(rng));
    }
  }
  ComplexMatrix h = 0.5 * (a + ComplexMatrix(a.adjoint()));
  const double norm = operator_norm(Operator(h));
  if (norm > 0.0) h /= norm;
  return Operator(std::move(h));
}

inline StateVector random_unit_state(Eigen::Index dim, std::mt19937_64& rng) {
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = Complex(uniform_pm1(rng), uniform_pm1(rng));
  }
  if (v.norm() == 0.0) v(0) = 1.0;
  v.normalize();
  return StateVector(std::move(v));
}

// Periodic second-difference stencil (-2, 1, 0, ..., 0, 1) / h^2 on a grid
// of circumference 2*pi, h = 2*pi/dim.
inline Operator periodic_laplacian(Eigen::Index dim) {
  const double h = 2.0 * M_PI / double(dim);
  const double w = 1.0 / (h * h);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    m(i, i) = -2.0 * w;
    m(i, (i + 1) % dim) += w;
    m(i, (i + dim - 1) % dim) += w;
  }
  return Operator(std::move(m));
}

inline Operator pauli_matrix(std::size_t index) {
  ComplexMatrix m(2, 2);
  switch (index) {
    case 0:  // sigma_z
      m << 1.0, 0.0, 0.0, -1.0;
      break;
    case 1:  // sigma_x
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case 2:  // sigma_y
      m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
      break;
    default:
      throw std::invalid_argument("config: pauli problems support at most m = 3");
  }
  return Operator(std::move(m));
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace detail

inline SweepConfig parse_sweep_config(const std::string& json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }

  SweepConfig cfg;
  try {
    detail::expect_object_keys(root, "the config root",
                               {"problem", "decomposition", "sweep", "formula",
                                "output"});

    const nlohmann::json& problem = detail::require_key(root, "the config root", "problem");
    detail::expect_object_keys(problem, "problem", {"dim", "kind", "seed", "potential"});
    cfg.problem.dim = detail::require_key(problem, "problem", "dim").get<Eigen::Index>();
    cfg.problem.kind = problem_kind_from_name(
        detail::require_key(problem, "problem", "kind").get<std::string>());
    if (problem.contains("seed")) {
      cfg.problem.seed = problem.at("seed").get<std::uint64_t>();
    }
    if (cfg.problem.dim < 1) {
      throw std::invalid_argument("config: problem.dim must be >= 1");
    }
    if (cfg.problem.kind == ProblemKind::laplacian_plus_potential) {
      cfg.problem.potential =
          detail::require_key(problem, "problem", "potential").get<std::vector<double>>();
      for (double v : cfg.problem.potential) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("config: potential entries must be finite");
        }
      }
    } else if (problem.contains("potential")) {
      throw std::invalid_argument(
          "config: problem.potential is only valid for kind "
          "laplacian_plus_potential");
    }

    const nlohmann::json& terms =
        detail::require_key(root, "the config root", "decomposition");
    detail::expect_object_keys(terms, "decomposition",
                               {"coefficients", "family_kinds"});
    cfg.decomposition.coefficients =
        detail::require_key(terms, "decomposition", "coefficients")
            .get<std::vector<double>>();
    for (const auto& name :
         detail::require_key(terms, "decomposition", "family_kinds")
             .get<std::vector<std::string>>()) {
      cfg.decomposition.family_kinds.push_back(family_kind_from_name(name));
    }
    if (cfg.decomposition.coefficients.empty() ||
        cfg.decomposition.coefficients.size() !=
            cfg.decomposition.family_kinds.size()) {
      throw std::invalid_argument(
          "config: decomposition needs matching non-empty coefficients and "
          "family_kinds");
    }

    const nlohmann::json& sweep = detail::require_key(root, "the config root", "sweep");
    detail::expect_object_keys(sweep, "sweep", {"t", "n_values", "methods"});
    cfg.sweep.t = detail::require_key(sweep, "sweep", "t").get<double>();
    if (!std::isfinite(cfg.sweep.t)) {
      throw std::invalid_argument("config: sweep.t must be finite");
    }
    cfg.sweep.n_values =
        detail::require_key(sweep, "sweep", "n_values").get<std::vector<long>>();
    if (cfg.sweep.n_values.empty()) {
      throw std::invalid_argument("config: sweep.n_values must be non-empty");
    }
    for (std::size_t i = 0; i < cfg.sweep.n_values.size(); ++i) {
      if (cfg.sweep.n_values[i] < 1 ||
          (i > 0 && cfg.sweep.n_values[i] <= cfg.sweep.n_values[i - 1])) {
        throw std::invalid_argument(
            "config: sweep.n_values must be strictly increasing positive "
            "integers");
      }
    }
    std::set<std::string> seen;
    for (const auto& name : detail::require_key(sweep, "sweep", "methods")
                                .get<std::vector<std::string>>()) {
      if (!seen.insert(name).second) {
        throw std::invalid_argument("config: duplicate method '" + name + "'");
      }
      cfg.sweep.methods.push_back(method_from_name(name));
    }
    if (cfg.sweep.methods.empty()) {
      throw std::invalid_argument("config: sweep.methods must be non-empty");
    }

    if (root.contains("formula")) {
      const nlohmann::json& formula = root.at("formula");
      detail::expect_object_keys(formula, "formula",
                                 {"series_j", "binomial_p", "term_cap"});
      if (formula.contains("series_j")) {
        cfg.formula.series_j = formula.at("series_j").get<long>();
      }
      if (formula.contains("binomial_p")) {
        cfg.formula.binomial_p = formula.at("binomial_p").get<long>();
      }
      if (formula.contains("term_cap")) {
        cfg.formula.term_cap = formula.at("term_cap").get<long>();
      }
      if (cfg.formula.series_j < 0 || cfg.formula.binomial_p < 1 ||
          cfg.formula.term_cap < 1) {
        throw std::invalid_argument(
            "config: formula requires series_j >= 0, binomial_p >= 1, "
            "term_cap >= 1");
      }
    }

    if (root.contains("output")) {
      const nlohmann::json& output = root.at("output");
      detail::expect_object_keys(output, "output", {"csv_path"});
      if (output.contains("csv_path")) {
        cfg.output.csv_path = output.at("csv_path").get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: malformed value: ") +
                                e.what());
  }
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_sweep_config(text.str());
}

struct ModelProblem {
  Decomposition decomposition;
  StateVector initial_state;  // normalized
};

// Deterministic problem construction: the same seed yields bit-identical
// operators and initial state. Random generators are normalized to unit
// spectral norm; resolvent families get t_max = 0.45 / ||L_k||, the other
// kinds are unrestricted in t.
inline ModelProblem build_problem(const SweepConfig& cfg) {
  const std::size_t m = cfg.decomposition.coefficients.size();
  if (m == 0 || m != cfg.decomposition.family_kinds.size()) {
    throw std::invalid_argument(
        "config: decomposition needs matching non-empty coefficients and "
        "family_kinds");
  }

  std::mt19937_64 rng(cfg.problem.seed);
  std::vector<Operator> generators;
  generators.reserve(m);

  switch (cfg.problem.kind) {
    case ProblemKind::pauli:
      if (cfg.problem.dim != 2) {
        throw std::invalid_argument("config: pauli problems require dim = 2");
      }
      for (std::size_t k = 0; k < m; ++k) {
        generators.push_back(detail::pauli_matrix(k));
      }
      break;
    case ProblemKind::random_hermitian:
      for (std::size_t k = 0; k < m; ++k) {
        generators.push_back(detail::random_hermitian_unit(cfg.problem.dim, rng));
      }
      break;
    case ProblemKind::laplacian_plus_potential: {
      if (cfg.problem.dim < 3) {
        throw std::invalid_argument(
            "config: laplacian_plus_potential requires dim >= 3");
      }
      if (m != 2) {
        throw std::invalid_argument(
            "config: laplacian_plus_potential requires exactly two terms "
            "(grid Laplacian, potential)");
      }
      if (cfg.decomposition.coefficients != std::vector<double>{1.0, -1.0}) {
        throw std::invalid_argument(
            "config: laplacian_plus_potential requires coefficients [1, -1] "
            "so that L = Laplacian - V");
      }
      if (Eigen::Index(cfg.problem.potential.size()) != cfg.problem.dim) {
        throw std::invalid_argument(
            "config: potential must list exactly dim entries");
      }
      generators.push_back(detail::periodic_laplacian(cfg.problem.dim));
      ComplexMatrix v = ComplexMatrix::Zero(cfg.problem.dim, cfg.problem.dim);
      for (Eigen::Index i = 0; i < cfg.problem.dim; ++i) {
        v(i, i) = cfg.problem.potential[std::size_t(i)];
      }
      generators.push_back(Operator(std::move(v)));
      break;
    }
  }

  std::vector<ChernoffFamily> families;
  families.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const FamilyKind kind = cfg.decomposition.family_kinds[k];
    double t_max = std::numeric_limits<double>::infinity();
    if (kind == FamilyKind::resolvent) {
      const double norm = operator_norm(generators[k]);
      if (norm > 0.0) t_max = 0.45 / norm;
    }
    families.push_back(make_family(kind, generators[k], t_max));
  }

  StateVector psi0 =
      cfg.problem.kind == ProblemKind::pauli
          ? StateVector((ComplexVector(2) << 1.0, 0.0).finished())
          : detail::random_unit_state(cfg.problem.dim, rng);

  return ModelProblem{
      Decomposition(cfg.decomposition.coefficients, std::move(families)),
      std::move(psi0)};
}

struct SweepRow {
  std::string method;
  double t = 0.0;
  long n = 0;
  double oracle_error = 0.0;
  double norm_drift = 0.0;
  double seconds = 0.0;
};

struct SweepFailure {
  std::string method;
  long n = 0;
  std::string reason;
};

// Either a fitted log-log slope or the flag that the method sits at the
// exactness floor (all errors below 1e-13), where a fit is meaningless.
struct OrderFit {
  bool exact = false;
  double slope = 0.0;
};

struct ConvergenceReport {
  std::vector<SweepRow> rows;           // sorted by (method, n)
  std::vector<SweepFailure> failures;   // sorted by (method, n)
  std::map<std::string, OrderFit> fitted_orders;
};

// Least-squares slope of log(error) against log(1/n) for one method.
inline OrderFit fit_order(const ConvergenceReport& report,
                          const std::string& method) {
  std::vector<double> xs, ys;
  double max_error = 0.0;
  std::size_t row_count = 0;
  for (const SweepRow& row : report.rows) {
    if (row.method != method) continue;
    ++row_count;
    max_error = std::max(max_error, row.oracle_error);
    if (row.oracle_error > 0.0) {
      xs.push_back(std::log(1.0 / double(row.n)));
      ys.push_back(std::log(row.oracle_error));
    }
  }
  if (row_count == 0) {
    throw std::invalid_argument("fit_order: no rows for method '" + method + "'");
  }
  if (max_error < 1e-13) {
    return OrderFit{true, 0.0};  // exactness regime, nothing to fit
  }
  if (xs.size() < 3) {
    throw std::invalid_argument(
        "fit_order: need at least 3 rows with positive error for '" + method +
        "'");
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= double(xs.size());
  mean_y /= double(xs.size());
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mean_x) * (ys[i] - mean_y);
    var += (xs[i] - mean_x) * (xs[i] - mean_x);
  }
  if (var == 0.0) {
    throw std::invalid_argument("fit_order: degenerate n grid for '" + method + "'");
  }
  return OrderFit{false, cov / var};
}

// Exact header required of every sweep CSV.
inline constexpr const char* kCsvHeader =
    "method,t,n,oracle_error,norm_drift,seconds";

inline void write_csv(const ConvergenceReport& report, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const SweepRow& row : report.rows) {
    os << row.method << ',' << detail::format_double(row.t) << ',' << row.n
       << ',' << detail::format_double(row.oracle_error) << ','
       << detail::format_double(row.norm_drift) << ','
       << detail::format_double(row.seconds) << '\n';
  }
}

inline void write_csv(const ConvergenceReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open '" + path + "'");
  }
  write_csv(report, out);
}

// Runs every (method, n) cell against the spectral oracle, recording error,
// norm drift and wall time. Per-cell failures become failure entries, not
// aborts. Writes the CSV when a path is configured.
inline ConvergenceReport run_sweep(const SweepConfig& cfg) {
  const ModelProblem problem = build_problem(cfg);
  const Decomposition& dec = problem.decomposition;
  const StateVector& psi0 = problem.initial_state;
  const double t = cfg.sweep.t;

  const long n_min = cfg.sweep.n_values.front();
  if (!(std::abs(t) / double(n_min) <= dec.t_max())) {
    std::ostringstream msg;
    msg << "config: sweep.t / min(n_values) = " << std::abs(t) / double(n_min)
        << " exceeds the family range t_max = " << dec.t_max();
    throw std::invalid_argument(msg.str());
  }

  const StateVector oracle = apply(stone_propagator(dec.generator(), t), psi0);

  std::vector<AbstractFamily> bss_families;
  for (Method method : cfg.sweep.methods) {
    if (method != Method::bss) continue;
    for (std::size_t k = 0; k < dec.term_count(); ++k) {
      const Operator weighted(dec.coefficients()[k] *
                              dec.families()[k].generator.entries());
      bss_families.push_back(unitary_approximant_family(
          cfg.decomposition.family_kinds[k], weighted));
    }
  }

  ConvergenceReport report;
  for (Method method : cfg.sweep.methods) {
    for (long n : cfg.sweep.n_values) {
      const auto started = std::chrono::steady_clock::now();
      try {
        StateVector psi = psi0;
        switch (method) {
          case Method::qf_exp:
            psi = chernoff_iterate(dec, t, n, psi0);
            break;
          case Method::qf_series:
            psi = series_formula(dec, t, n, cfg.formula.series_j, psi0,
                                 cfg.formula.term_cap)
                      .value;
            break;
          case Method::qf_binomial:
            psi = binomial_formula(dec, t, n, cfg.formula.binomial_p, psi0,
                                   cfg.formula.term_cap)
                      .value;
            break;
          case Method::trotter:
            psi = trotter_product(dec, t, n, psi0);
            break;
          case Method::bss:
            psi = bss_product(bss_families, t, n, psi0);
            break;
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          started)
                .count();
        report.rows.push_back(SweepRow{
            method_name(method), t, n,
            (psi.entries() - oracle.entries()).norm(),
            std::abs(psi.norm() - psi0.norm()), seconds});
      } catch (const std::exception& e) {
        report.failures.push_back(SweepFailure{method_name(method), n, e.what()});
      }
    }
  }

  const auto by_method_n = [](const auto& lhs, const auto& rhs) {
    return lhs.method != rhs.method ? lhs.method < rhs.method : lhs.n < rhs.n;
  };
  std::sort(report.rows.begin(), report.rows.end(), by_method_n);
  std::sort(report.failures.begin(), report.failures.end(), by_method_n);

  for (Method method : cfg.sweep.methods) {
    try {
      report.fitted_orders[method_name(method)] =
          fit_order(report, method_name(method));
    } catch (const std::invalid_argument&) {
      // too few usable rows; leave the method out of the fit map
    }
  }

  if (!cfg.output.csv_path.empty()) {
    write_csv(report, cfg.output.csv_path);
  }
  return report;
}

}  // namespace qfeyn
