#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <iosfwd>
#include <string>
#include <vector>

namespace mgems {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// One second-order cone constraint ||A u - b||_2 <= d'u - gamma.
struct ConeBlock {
    SpMat A;  // m x n, m >= 1
    Eigen::VectorXd b;
    Eigen::SparseVector<double> d;
    double gamma = 0.0;
};

/// Standard conic form: min f'u subject to box bounds, stacked linear
/// inequalities A_ineq u <= b_ineq, equalities A_eq u = b_eq, and a list of
/// second-order cone blocks. Infinite bounds are allowed and skipped.
struct ConicProgram {
    Eigen::VectorXd cost;
    Eigen::VectorXd lower, upper;
    SpMat a_ineq;
    Eigen::VectorXd b_ineq;
    SpMat a_eq;
    Eigen::VectorXd b_eq;
    std::vector<ConeBlock> cones;

    int n() const { return static_cast<int>(cost.size()); }
    void validate() const;  // throws std::invalid_argument on shape errors
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

/// Dual variables grouped by constraint family; all are nonnegative except
/// eq. Cone duals are stored as (z0, z1) stacked per block.
struct DualSolution {
    Eigen::VectorXd box_lower, box_upper;  // size n (zero where bound infinite)
    Eigen::VectorXd ineq;
    Eigen::VectorXd eq;
    std::vector<Eigen::VectorXd> cones;  // each of size 1 + rows(A)
};

struct SolverResult {
    Eigen::VectorXd u;
    double objective = 0.0;
    int iterations = 0;
    double duality_gap = 0.0;  // relative
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    SolveStatus status = SolveStatus::IterationLimit;
    double solve_seconds = 0.0;
    double seconds_per_iteration = 0.0;
    DualSolution duals;
};

struct SolverOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-7;
    int max_iter = 200;
    bool mehrotra = false;      // predictor-corrector when set
    double centering = 0.2;     // fixed sigma for the plain method
    double step_fraction = 0.99;
    int dense_threshold = 500;  // KKT dimension below which a dense solve is used
    int stall_window = 20;      // iterations without progress before declaring infeasible
    bool verbose = false;
};

/// Primal-dual path-following interior-point method with Nesterov-Todd
/// scaling for the cone blocks. Deterministic for fixed inputs.
SolverResult solve(const ConicProgram& prog, const SolverOptions& opt = {});

struct KktResiduals {
    double eq = 0.0;     // ||A_eq u - b_eq||_inf
    double ineq = 0.0;   // max violation of A_ineq u <= b_ineq
    double box = 0.0;    // max box violation
    double cone = 0.0;   // max cone violation ||Au-b|| - (d'u - gamma)
    double dual = 0.0;   // stationarity residual, inf-norm
    double complementarity = 0.0;

    double max_primal() const;
};

KktResiduals kkt_residuals(const ConicProgram& prog, const Eigen::VectorXd& u,
                           const DualSolution& duals);

/// Sparse-triplet text format for debugging and cross-implementation
/// comparison; see docs/program_format.md.
void dump_program(std::ostream& out, const ConicProgram& prog);
ConicProgram load_program(std::istream& in);
void dump_program_file(const std::string& path, const ConicProgram& prog);
ConicProgram load_program_file(const std::string& path);

}  // namespace mgems
