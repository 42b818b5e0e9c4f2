#pragma once

#include "cht/row_solver.hpp"
#include "cht/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cht {

/// Brute-force minimizer of the row problem, built without the case table:
/// theta is searched along the family S(z, lambda + alpha) over a dense alpha
/// grid, the best beta for each theta is found exactly, and the winner is
/// polished by projected gradient descent on the unconstrained split
/// variables (b+, b-, theta+, theta-).
struct OracleOptions {
    /// Alpha grid spacing as a fraction of lambda.
    double alpha_resolution = 1e-5;
    /// Projected-gradient iterations after the search; 0 disables.
    int polish_iterations = 500;
};

struct OracleSolution {
    double beta_plus = 0;
    double beta_minus = 0;
    Vector<double> theta;
    double objective = 0;

    double beta() const { return beta_plus - beta_minus; }
};

OracleSolution oracle_solve_row(double w, const Vector<double>& z, double lambda, const OracleOptions& options = {});

/// Descending grid top, top - step, ... (> 0) with top = max(|w|, ||z||_inf) + 1.
std::vector<double> entry_grid(double w, const Vector<double>& z, double step);

/// For the main effect and each interaction: the largest grid lambda at
/// which the oracle solution is nonzero (b+ + b- or |theta_k| above 1e-9),
/// or 0 when it never is.
struct OracleEntryPoints {
    double nu = 0;
    Vector<double> nu_k;
};

OracleEntryPoints oracle_entry_points(double w, const Vector<double>& z, const std::vector<double>& lambda_grid);

struct ProbeResult {
    bool passed = true;
    /// Smallest objective change seen (perturbed minus given).
    double min_change = 0;
    /// Offending point when failed: b+, b-, theta.
    std::vector<double> witness;
    double witness_change = 0;
};

/// Objective at `trials` random feasible points within distance 1e-3 of the
/// given solution (log-uniform radii from 1e-6) must exceed the objective at
/// the solution.
ProbeResult uniqueness_probe(double w, const Vector<double>& z, double lambda, const RowSolution<double>& solution,
                             int trials, std::uint64_t seed = 1);

struct OracleFailure {
    std::size_t instance = 0;
    double w = 0;
    std::vector<double> z;
    double lambda = 0;
    std::string reason;
};

struct OracleReport {
    std::size_t instances = 0;
    double max_coordinate_discrepancy = 0;
    double max_entry_discrepancy = 0;
    /// max over instances of closed-form objective minus oracle objective.
    double max_objective_gap = 0;
    double max_kkt_residual = 0;
    std::vector<OracleFailure> failures;
    double seconds = 0;
};

struct OracleCheckOptions {
    std::size_t instances = 1000;
    std::uint64_t seed = 1;
    /// Entry-point grid step.
    double grid = 1e-3;
    unsigned threads = 1;
    int probe_trials = 50;
};

/// Random rows (m uniform in 1..10, w and z normal with sd 2, lambda drawn
/// across all cases) checked against the closed forms.
OracleReport run_oracle_check(const OracleCheckOptions& options = {});

void write_report_json(std::ostream& out, const OracleReport& report);

}  // namespace cht
