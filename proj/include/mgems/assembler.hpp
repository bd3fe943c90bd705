#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <vector>

#include "mgems/netmodel.hpp"
#include "mgems/socp.hpp"

namespace mgems {

struct AssemblyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Index map of the stacked decision vector: per-battery discharge/charge
/// blocks, grid buy/sell blocks, per-step branch-flow variables (P, l, v),
/// then per-type incentive blocks. All blocks have n_pre entries per entity.
/// The LP variant drops the branch-flow variables (n_br = 0).
class DecisionLayout {
  public:
    static DecisionLayout socp(int n_pre, int n_batt, int n_br, int n_tp);
    static DecisionLayout lp(int n_pre, int n_batt, int n_tp);

    int n_pre = 0, n_batt = 0, n_br = 0, n_tp = 0;

    int dim() const { return n_pre * (2 * (1 + n_batt) + 3 * n_br + n_tp); }
    bool has_grid_vars() const { return n_br > 0; }

    int dis(int batt, int s) const { return batt * 2 * n_pre + s; }
    int ch(int batt, int s) const { return batt * 2 * n_pre + n_pre + s; }
    int buy(int s) const { return 2 * n_pre * n_batt + s; }
    int sell(int s) const { return 2 * n_pre * n_batt + n_pre + s; }

    int grid_base() const { return 2 * n_pre * (1 + n_batt); }
    int br_p(int s, int e) const { return grid_base() + s * 3 * n_br + e; }
    int br_l(int s, int e) const { return grid_base() + s * 3 * n_br + n_br + e; }
    /// Squared-voltage column of a non-slack bus (id >= 2).
    int bus_v(int s, int bus_id) const {
        return grid_base() + s * 3 * n_br + 2 * n_br + (bus_id - 2);
    }
    int dc(int type, int s) const { return grid_base() + 3 * n_br * n_pre + type * n_pre + s; }
};

DecisionLayout build_layout(int n_pre, int n_batt, int n_br, int n_tp);

enum class LoadType { Residential = 0, Business = 1 };

/// Time-of-use prices. Periods: valley 0-8 h, off-peak 8-16 h and 21-24 h,
/// peak 16-21 h. Grid purchases are priced with the residential column.
struct TariffSchedule {
    std::array<double, 3> buy_residential{0.12, 0.20, 0.35};  // valley, off-peak, peak
    std::array<double, 3> buy_business{0.06, 0.12, 0.25};
    std::array<double, 3> sell{0.02, 0.05, 0.10};
    std::array<double, 3> diesel{0.30, 0.30, 0.30};

    static int period_of_hour(double hour);
    double buy_for_type(int type, double hour) const;
    double sell_at(double hour) const { return sell[period_of_hour(hour)]; }
    double grid_buy(double hour) const { return buy_residential[period_of_hour(hour)]; }
    double diesel_at(double hour) const { return diesel[period_of_hour(hour)]; }
};

struct BatteryParams {
    int bus = 0;
    double p_rated_pu = 0.0;
    double e_max_puh = 0.0;  // rated power times duration
    double eta_ch = 0.95, eta_dis = 0.95;
    double soc0 = 0.3, soc_min = 0.2, soc_max = 0.9;
    double c_deg = 0.03;  // $/kWh cycled

    void validate() const;
};

/// Everything one optimization needs, with forecasts already evaluated.
/// alpha_cons holds per-type node-by-step sensitivities in the consumption
/// convention (<= 0); the builders negate them onto the balance rows, which
/// matches the injection-convention bundle exactly.
struct AssemblyInput {
    const NetworkModel* net = nullptr;
    int n_pre = 0;
    double dt_hours = 1.0;   // prediction step length
    int first_day_step = 1;  // 1-based index k of the first horizon step in the day
    int day_steps = 24;      // prediction steps per day (K_d on the prediction grid)

    std::vector<BatteryParams> batteries;
    Eigen::VectorXd soc_now;

    Eigen::MatrixXd injections;  // n_bus x n_pre, fixed solar + base load + diesel

    int n_tp = 0;
    std::vector<Eigen::MatrixXd> alpha_cons;  // per type: n_bus x n_pre
    Eigen::MatrixXd dc_bound;                 // n_tp x n_pre
    double epsilon_cap = 0.0;
    double dr_history = 0.0;  // accumulated past adjustment, consumption pu-h

    Eigen::VectorXd grid_buy;    // per step, $/kWh
    Eigen::VectorXd sell_price;  // per step, $/kWh

    double p_sys_max = 10.0;
    double p_br_max = 10.0;
    double v_min = 0.9, v_max = 1.1;
    double current_limit_scale = 1.0;  // decision-side derating of ampacities

    void validate() const;
};

enum class FlowModel { LP, SOCP };

Eigen::VectorXd build_cost_vector(const DecisionLayout& layout, const AssemblyInput& in);

void build_bounds(const DecisionLayout& layout, const AssemblyInput& in, Eigen::VectorXd& lower,
                  Eigen::VectorXd& upper);

/// Cumulative SoC rows: per battery, n_pre upper-bound rows then n_pre
/// lower-bound rows, with the end-of-day lower row retargeted to enforce
/// terminal SoC >= initial SoC.
void build_soc_block(const DecisionLayout& layout, const AssemblyInput& in, SpMat& a,
                     Eigen::VectorXd& b);

/// Two rows capping the aggregate energy adjustment over the rest of the
/// scheduling day, with the history folded into the right-hand side.
void build_energy_block(const DecisionLayout& layout, const AssemblyInput& in, SpMat& a,
                        Eigen::VectorXd& b);

/// One rotated-style cone per branch per step in the two-row form
/// ||[2 P, v_in - l]|| <= v_in + l; the slack parent voltage enters as the
/// constant 1.
std::vector<ConeBlock> build_cone_blocks(const NetworkModel& net, const DecisionLayout& layout);

/// Power-balance and voltage-drop equality rows per branch per step,
/// including battery columns and cumulative incentive columns.
void build_grid_block(const NetworkModel& net, const DecisionLayout& layout,
                      const AssemblyInput& in, SpMat& a, Eigen::VectorXd& b);

/// One equality row per step anchoring the net main-grid exchange to the
/// flows leaving the slack bus: buy - sell - sum of slack branch powers
/// equals the (normally zero) fixed slack-bus injection.
void build_slack_block(const NetworkModel& net, const DecisionLayout& layout,
                       const AssemblyInput& in, SpMat& a, Eigen::VectorXd& b);

ConicProgram assemble_program(const AssemblyInput& in, FlowModel mode);

DecisionLayout layout_for(const AssemblyInput& in, FlowModel mode);

}  // namespace mgems
