// qfeyn command line: convergence sweeps, order comparison and tangency
// checks for product-formula propagators.
//
// Exit codes: 0 success, 2 config rejected, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>

#include "qfeyn/qfeyn.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigRejected = 2;
constexpr int kExitNumericalFailure = 3;

void print_report(const qfeyn::ConvergenceReport& report) {
  std::cout << std::left << std::setw(12) << "method" << std::right
            << std::setw(8) << "n" << std::setw(15) << "oracle_error"
            << std::setw(14) << "norm_drift" << std::setw(12) << "seconds"
            << '\n';
  for (const qfeyn::SweepRow& row : report.rows) {
    std::cout << std::left << std::setw(12) << row.method << std::right
              << std::setw(8) << row.n << std::setw(15) << std::scientific
              << std::setprecision(4) << row.oracle_error << std::setw(14)
              << row.norm_drift << std::setw(12) << std::fixed
              << std::setprecision(4) << row.seconds << '\n';
    std::cout.unsetf(std::ios::floatfield);
  }
  for (const qfeyn::SweepFailure& failure : report.failures) {
    std::cout << "FAILED " << failure.method << " n=" << failure.n << ": "
              << failure.reason << '\n';
  }
}

void print_orders(const qfeyn::ConvergenceReport& report) {
  std::cout << "fitted convergence orders (log error vs log 1/n):\n";
  for (const auto& [method, fit] : report.fitted_orders) {
    std::cout << "  " << std::left << std::setw(12) << method;
    if (fit.exact) {
      std::cout << "exact (errors below 1e-13)\n";
    } else {
      std::cout << std::setprecision(3) << std::fixed << fit.slope << '\n';
      std::cout.unsetf(std::ios::floatfield);
    }
  }
}

int run_sweep_command(const std::string& config_path, const std::string& out) {
  qfeyn::SweepConfig cfg;
  try {
    cfg = qfeyn::load_sweep_config(config_path);
    if (!out.empty()) cfg.output.csv_path = out;
    if (cfg.output.csv_path.empty()) {
      std::cerr << "sweep: no CSV path; set output.csv_path or pass --out\n";
      return kExitConfigRejected;
    }
  } catch (const std::exception& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kExitConfigRejected;
  }

  try {
    const qfeyn::ConvergenceReport report = qfeyn::run_sweep(cfg);
    print_report(report);
    print_orders(report);
    std::cout << "wrote " << cfg.output.csv_path << '\n';
    return report.failures.empty() ? kExitOk : kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kExitConfigRejected;
  }
}

int run_compare_command(const std::string& config_path) {
  qfeyn::SweepConfig cfg;
  try {
    cfg = qfeyn::load_sweep_config(config_path);
    cfg.output.csv_path.clear();  // compare never writes files
  } catch (const std::exception& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kExitConfigRejected;
  }

  try {
    const qfeyn::ConvergenceReport report = qfeyn::run_sweep(cfg);
    print_orders(report);
    for (const qfeyn::SweepFailure& failure : report.failures) {
      std::cout << "FAILED " << failure.method << " n=" << failure.n << ": "
                << failure.reason << '\n';
    }
    return report.failures.empty() ? kExitOk : kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kExitConfigRejected;
  }
}

int run_check_tangency_command(const std::string& kind_name, long dim,
                               std::uint64_t seed) {
  try {
    const qfeyn::FamilyKind kind = qfeyn::family_kind_from_name(kind_name);
    std::mt19937_64 rng(seed);
    const qfeyn::Operator generator =
        qfeyn::detail::random_hermitian_unit(dim, rng);
    double t_max = std::numeric_limits<double>::infinity();
    if (kind == qfeyn::FamilyKind::resolvent) {
      t_max = 0.45 / qfeyn::operator_norm(generator);
    }
    const qfeyn::ChernoffFamily family =
        qfeyn::make_family(kind, generator, t_max);
    const qfeyn::TangencyReport report = qfeyn::check_tangency(family);

    std::cout << "family: " << family.label << ", dim " << dim << ", seed "
              << seed << '\n';
    std::cout << std::scientific << std::setprecision(4);
    for (std::size_t i = 0; i < report.residuals.size(); ++i) {
      std::cout << "  t = " << report.t_grid[i]
                << "  residual = " << report.residuals[i] << '\n';
    }
    std::cout.unsetf(std::ios::floatfield);
    if (report.failed_t) {
      std::cout << "  evaluator failed at t = " << *report.failed_t << '\n';
    }
    std::cout << "  collective bound sup ||S(t)||: " << report.collective_bound
              << '\n';
    std::cout << "  S(0) = I: " << (report.ct2_pass ? "yes" : "NO") << '\n';
    std::cout << "  self-adjoint on grid: "
              << (report.hermitian_at_grid ? "yes" : "NO") << '\n';
    std::cout << "  " << report.notes << '\n';
    std::cout << (report.tangent ? "TANGENT" : "NOT TANGENT") << '\n';
    return report.tangent ? kExitOk : kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kExitConfigRejected;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qfeyn: product-formula propagators for finite-dimensional "
      "Schroedinger problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "run a convergence sweep from a config file and write a CSV");
  sweep->add_option("--config", config_path, "path to the JSON sweep config")
      ->required();
  sweep->add_option("--out", out_path, "override the CSV output path");

  std::string compare_config;
  CLI::App* compare = app.add_subcommand(
      "compare", "run a sweep in memory and print fitted convergence orders");
  compare->add_option("--config", compare_config, "path to the JSON sweep config")
      ->required();

  std::string kind;
  long dim = 2;
  std::uint64_t seed = 42;
  CLI::App* tangency = app.add_subcommand(
      "check-tangency",
      "verify a built-in family against a random self-adjoint generator");
  tangency
      ->add_option("--kind", kind,
                   "family kind: exact_exponential, linear, resolvent or "
                   "quadratic")
      ->required();
  tangency->add_option("--dim", dim, "generator dimension")->required();
  tangency->add_option("--seed", seed, "generator seed (default 42)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigRejected;
  }

  if (sweep->parsed()) return run_sweep_command(config_path, out_path);
  if (compare->parsed()) return run_compare_command(compare_config);
  if (tangency->parsed()) {
    if (dim < 1) {
      std::cerr << "config rejected: --dim must be >= 1\n";
      return kExitConfigRejected;
    }
    return run_check_tangency_command(kind, dim, seed);
  }
  return kExitConfigRejected;
}
