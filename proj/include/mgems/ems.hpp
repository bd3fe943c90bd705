#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mgems/assembler.hpp"
#include "mgems/forecast.hpp"
#include "mgems/opf.hpp"
#include "mgems/scenario.hpp"
#include "mgems/socp.hpp"

namespace mgems {

struct EmsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Policy { DayAhead, MPC };

struct EmsMode {
    FlowModel flow = FlowModel::SOCP;
    Policy policy = Policy::MPC;
    bool dr = true;

    std::string label() const;
};

/// Parses "lp-da" | "lp-mpc" | "socp-da" | "socp-mpc".
std::optional<EmsMode> parse_mode(const std::string& text);

/// Scenario with fitted forecasters; build once, run many modes.
struct PreparedScenario {
    const Scenario* sc = nullptr;
    ProfileDictionary dict;
    std::vector<KrrModel> solar_models;  // on normalized profiles
    std::vector<KrrModel> load_models;
    std::vector<MsmsResult> solar_tuning;
    std::vector<MsmsResult> load_tuning;
    double epsilon_cap = 0.0;           // pu-h, fixed from the t=0 load forecast
    Eigen::MatrixXd base_day_forecast;  // groups x steps_per_day, injection pu, t=0

    int steps_per_day() const { return sc->config.horizon.steps_per_day(); }
    int decision_steps() const { return sc->config.horizon.decision_steps(); }
};

PreparedScenario prepare_scenario(const Scenario& sc);

/// Horizon forecasts seeded by realized measurements before `tau_hours`.
/// `measured_load_inj`, when given (groups x completed decision steps, pu),
/// supplies the metered load values (base plus accumulated DR shift) for the
/// window seeds; otherwise the clean base profiles are used.
ForecastBundle forecast_at(const PreparedScenario& ps, double tau_hours, int n_pre,
                           const Eigen::MatrixXd* measured_load_inj = nullptr);

/// Assembly input for the optimization at `tau_hours`.
AssemblyInput make_assembly_input(const PreparedScenario& ps, const ForecastBundle& bundle,
                                  bool dr_enabled, double tau_hours, int n_pre,
                                  const Eigen::VectorXd& soc, double dr_history);

struct StepRecord {
    int step = 0;
    double hour = 0.0;
    Eigen::VectorXd dis, ch;      // committed battery powers, pu
    Eigen::VectorXd dc;           // committed incentives per type, $/kWh
    double buy_planned = 0.0, sell_planned = 0.0;
    Eigen::VectorXd soc_after;    // per battery
    double realized_buy = 0.0, realized_sell = 0.0, realized_loss = 0.0;
    double step_cost_usd = 0.0;
    double gap_pct = 0.0;             // SOCP decision-slice relaxation gap
    int voltage_violations = 0, current_violations = 0;
    bool plant_converged = true;
    bool fallback = false;
    int solver_iterations = 0;
    double solve_seconds = 0.0;
    double exclusivity_buy_sell = 0.0;  // min(buy, sell) at the optimum
    double exclusivity_dis_ch = 0.0;    // max over batteries of min(dis, ch)
    double energy_cap_cumulative = 0.0; // running sum of alpha*dC*dt (consumption pu-h)
    Eigen::VectorXd alpha_committed;    // per type, consumption convention
    GridState plant;
};

struct SimulationTrace {
    std::vector<StepRecord> steps;
    double dt_d_hours = 1.0;
    double epsilon_cap = 0.0;
    Eigen::MatrixXd load_alpha_history;  // groups x K_d, consumption pu per $/kWh
    Eigen::MatrixXd load_base_realized;  // groups x K_d, injection pu
    Eigen::MatrixXd load_dr_realized;    // groups x K_d, cumulative level shift, injection pu
    Eigen::VectorXd soc_initial;

    int n_steps() const { return static_cast<int>(steps.size()); }
};

struct CostReport {
    double economic_cost = 0.0;      // USD
    double dr_user_cost = 0.0;       // USD (negative = users save)
    double diesel_cost = 0.0;        // USD, reported separately
    double load_change_min_pct = 0.0;
    double load_change_max_pct = 0.0;
    bool security_satisfied = true;
    int violation_count = 0;
    double decision_time_per_step = 0.0;  // seconds
    double gap_mean_pct = 0.0, gap_std_pct = 0.0;  // SOCP modes only
};

struct SimulationResult {
    SimulationTrace trace;
    CostReport report;
    EmsMode mode;
};

/// Closed-loop run of one mode against the plant.
SimulationResult run_simulation(const PreparedScenario& ps, const EmsMode& mode,
                                const SolverOptions& solver_opt = {});

/// Committed full-day schedule from a single optimization at t = 0.
struct DayAheadSchedule {
    Eigen::MatrixXd dis, ch;  // batteries x steps_per_day
    Eigen::MatrixXd dc;       // types x steps_per_day
    Eigen::VectorXd buy, sell;
    SolverResult solve;
    ForecastBundle bundle;
};
DayAheadSchedule run_day_ahead(const PreparedScenario& ps, const EmsMode& mode,
                               const SolverOptions& solver_opt = {});

/// Realized running cost of a trace (the plant-truth restatement of the
/// optimizer's objective).
double economic_cost(const SimulationTrace& trace, const PreparedScenario& ps);

struct DrSettlement {
    double user_cost_usd = 0.0;
    Eigen::VectorXd energy_change_pct;  // per load group
};
DrSettlement dr_settlement(const SimulationTrace& trace, const PreparedScenario& ps);

/// SoC integration used by the plant application.
double soc_after_step(double soc, double p_ch, double p_dis, const BatteryParams& bat, double dt);

}  // namespace mgems
