#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mgems/netmodel.hpp"

namespace mgems {

/// Solved operating point of the active-power branch flow model. Branch
/// quantities are indexed like NetworkModel::branches; bus_v holds squared
/// voltages for all buses with bus_v[0] = 1 (slack).
struct GridState {
    Eigen::VectorXd branch_p;  // sending-end active power, pu
    Eigen::VectorXd branch_l;  // squared current magnitude, pu
    Eigen::VectorXd bus_v;     // squared voltage magnitude, pu
    Eigen::VectorXd injections;
    double losses = 0.0;        // sum of l*r
    double slack_import = 0.0;  // net power entering at the slack bus, pu
    bool converged = false;
    int sweeps = 0;
    double max_residual = 0.0;

    double slack_power() const { return slack_import; }
};

struct PlantOptions {
    int max_sweeps = 100;
    double tol = 1e-10;
};

/// Backward/forward sweep from a flat start. `injections` has one entry per
/// bus (1-based id - 1); the slack entry is ignored. Non-convergence or a
/// collapsing voltage leaves converged = false.
GridState solve_plant_powerflow(const NetworkModel& net, const Eigen::VectorXd& injections,
                                const PlantOptions& opt = {});

/// Branch-power-weighted relative mismatch between P^2 and v*l, in percent.
/// Branches with both P^2 and v*l below 1e-12 are skipped; if total |P| is
/// negligible the gap is 0.
double relaxation_gap(const Eigen::VectorXd& branch_p, const Eigen::VectorXd& branch_l,
                      const Eigen::VectorXd& v_sending);

double relaxation_gap(const NetworkModel& net, const GridState& state);

struct Violation {
    int entity = 0;  // bus id or branch index
    int step = 0;
    double value = 0.0;  // offending magnitude (voltage pu or current pu)
};

struct SecurityReport {
    std::vector<Violation> voltage;
    std::vector<Violation> current;
    double max_v = 0.0, min_v = 0.0, max_loading = 0.0;

    bool clean() const { return voltage.empty() && current.empty(); }
};

/// Flags sqrt(v) outside [v_min, v_max] and sqrt(l) above the branch rating.
/// Exceedances within `tol` of the limit are not recorded.
SecurityReport check_security(const NetworkModel& net, const GridState& state, double v_min,
                              double v_max, int step = 0, double tol = 1e-6);

}  // namespace mgems
