#include "mgems/ems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgems {

std::string EmsMode::label() const {
    std::string s = flow == FlowModel::LP ? "lp" : "socp";
    s += policy == Policy::DayAhead ? "-da" : "-mpc";
    if (!dr) s += "-nodr";
    return s;
}

std::optional<EmsMode> parse_mode(const std::string& text) {
    EmsMode m;
    std::string t = text;
    if (t == "lp-da") m = {FlowModel::LP, Policy::DayAhead, true};
    else if (t == "lp-mpc") m = {FlowModel::LP, Policy::MPC, true};
    else if (t == "socp-da") m = {FlowModel::SOCP, Policy::DayAhead, true};
    else if (t == "socp-mpc") m = {FlowModel::SOCP, Policy::MPC, true};
    else return std::nullopt;
    return m;
}

namespace {

// Realized profile sampling on the prediction grid with daily wrap; linear
// interpolation covers sub-step decision times.
double sample_profile(const Eigen::VectorXd& day, double step_pos) {
    const int n = static_cast<int>(day.size());
    double p = std::fmod(step_pos, static_cast<double>(n));
    if (p < 0) p += n;
    const int i0 = static_cast<int>(std::floor(p));
    const int i1 = (i0 + 1) % n;
    const double w = p - i0;
    return (1.0 - w) * day[i0] + w * day[i1];
}

// Normalized realized value for a device at prediction-grid index (may be
// negative -> read the tail of the last history day).
double realized_or_history(const Eigen::VectorXd& realized,
                           const std::vector<Eigen::VectorXd>& history, int idx) {
    const int n = static_cast<int>(realized.size());
    if (idx >= 0) return realized[idx % n];
    const Eigen::VectorXd& last = history.back();
    return last[((idx % n) + n) % n];
}

int type_index(LoadType t) { return static_cast<int>(t); }

}  // namespace

double soc_after_step(double soc, double p_ch, double p_dis, const BatteryParams& bat, double dt) {
    return soc + (p_ch * bat.eta_ch / bat.e_max_puh - p_dis / (bat.e_max_puh * bat.eta_dis)) * dt;
}

PreparedScenario prepare_scenario(const Scenario& sc) {
    PreparedScenario ps;
    ps.sc = &sc;
    const auto& cfg = sc.config;
    const int steps = cfg.horizon.steps_per_day();
    ps.dict = bell_dictionary(steps, cfg.forecast.dictionary_size);

    auto tune_and_fit = [&](const std::vector<Eigen::VectorXd>& days, KrrModel& model,
                            MsmsResult& tuning) {
        tuning = msms_tune(days, cfg.forecast.sigma_grid, cfg.forecast.lambda_grid,
                           cfg.forecast.msms, cfg.forecast.lag);
        Eigen::MatrixXd x;
        Eigen::VectorXd y;
        krr_samples_from_days(days, cfg.forecast.lag, x, y);
        model = fit_krr(x, y, tuning.sigma, tuning.lambda, cfg.forecast.lag);
    };

    ps.solar_models.resize(cfg.solar.size());
    ps.solar_tuning.resize(cfg.solar.size());
    for (size_t i = 0; i < cfg.solar.size(); ++i)
        tune_and_fit(sc.profiles.solar_history[i], ps.solar_models[i], ps.solar_tuning[i]);

    ps.load_models.resize(cfg.loads.size());
    ps.load_tuning.resize(cfg.loads.size());
    for (size_t i = 0; i < cfg.loads.size(); ++i)
        tune_and_fit(sc.profiles.load_history[i], ps.load_models[i], ps.load_tuning[i]);

    // Day-ahead base-load forecast fixes the daily energy-adjustment cap.
    ForecastBundle t0 = forecast_at(ps, 0.0, steps);
    ps.base_day_forecast = t0.base_load;
    if (cfg.dr.epsilon_cap > 0) {
        ps.epsilon_cap = cfg.dr.epsilon_cap;
    } else {
        ps.epsilon_cap =
            1e-3 * std::abs(t0.base_load.sum()) * cfg.horizon.dt_p_hours;
    }
    return ps;
}

ForecastBundle forecast_at(const PreparedScenario& ps, double tau_hours, int n_pre,
                           const Eigen::MatrixXd* measured_load_inj) {
    const auto& cfg = ps.sc->config;
    const auto& prof = ps.sc->profiles;
    const int steps = ps.steps_per_day();
    const double dt_p = cfg.horizon.dt_p_hours;
    const double dt_d = cfg.horizon.dt_d_hours;
    const int lag = cfg.forecast.lag;

    // Grid index of the last completed prediction step before tau.
    const int last_completed = static_cast<int>(std::floor(tau_hours / dt_p + 1e-9)) - 1;
    const int start_step = ((last_completed % steps) + steps) % steps;

    ForecastBundle out;
    out.solar.resize(cfg.solar.size(), n_pre);
    out.base_load.resize(cfg.loads.size(), n_pre);
    out.alpha.resize(cfg.loads.size(), n_pre);

    RolloutOptions solar_opt;
    solar_opt.dictionary_assisted = true;
    solar_opt.dict = &ps.dict;
    solar_opt.clip_nonnegative = true;

    for (size_t i = 0; i < cfg.solar.size(); ++i) {
        std::vector<double> window(lag);
        for (int w = 0; w < lag; ++w)
            window[w] = realized_or_history(prof.solar_realized[i], prof.solar_history[i],
                                            last_completed - lag + 1 + w);
        const auto traj =
            rollout(ps.solar_models[i], window, start_step, n_pre, steps, solar_opt);
        const double rated = cfg.solar[i].rated_mw / cfg.s_base_mva;
        for (int n = 0; n < n_pre; ++n) out.solar(i, n) = rated * traj[n];
    }

    for (size_t i = 0; i < cfg.loads.size(); ++i) {
        const double rated_inj = cfg.loads[i].rated_kw / (1000.0 * cfg.s_base_mva);
        std::vector<double> window(lag);
        for (int w = 0; w < lag; ++w) {
            const int idx = last_completed - lag + 1 + w;
            if (measured_load_inj && idx >= 0) {
                // Metered consumption, normalized; maps the prediction-grid
                // index onto the decision step at that step's start.
                const int dec = std::min<int>(static_cast<int>(measured_load_inj->cols()) - 1,
                                              static_cast<int>(std::lround(idx * dt_p / dt_d)));
                window[w] = -(*measured_load_inj)(i, dec) / rated_inj;
            } else {
                window[w] = realized_or_history(prof.load_realized[i], prof.load_history[i], idx);
            }
        }
        const auto traj = base_load_rollout(ps.load_models[i], window, start_step, n_pre, steps);
        const int tp = type_index(cfg.loads[i].type);
        for (int n = 0; n < n_pre; ++n) {
            const double consumption = std::max(traj[n], 0.0);
            out.base_load(i, n) = -rated_inj * consumption;
            const double hour = tau_hours + n * dt_p;
            const double tariff = cfg.tariffs.buy_for_type(tp, hour);
            const double elasticity =
                cfg.dr.elasticity_by_type[tp][TariffSchedule::period_of_hour(hour)];
            out.alpha(i, n) = price_sensitivity(elasticity, out.base_load(i, n), tariff);
        }
    }
    return out;
}

AssemblyInput make_assembly_input(const PreparedScenario& ps, const ForecastBundle& bundle,
                                  bool dr_enabled, double tau_hours, int n_pre,
                                  const Eigen::VectorXd& soc, double dr_history) {
    const auto& cfg = ps.sc->config;
    const auto& net = ps.sc->network;
    const int steps = ps.steps_per_day();
    const double dt_p = cfg.horizon.dt_p_hours;

    AssemblyInput in;
    in.net = &net;
    in.n_pre = n_pre;
    in.dt_hours = dt_p;
    const int start = static_cast<int>(std::floor(tau_hours / dt_p + 1e-9));
    in.first_day_step = (start % steps) + 1;
    in.day_steps = steps;
    in.batteries = cfg.batteries;
    in.soc_now = soc;

    in.injections = Eigen::MatrixXd::Zero(net.n_bus(), n_pre);
    for (size_t i = 0; i < cfg.solar.size(); ++i)
        for (int n = 0; n < n_pre; ++n) in.injections(cfg.solar[i].bus - 1, n) += bundle.solar(i, n);
    for (size_t i = 0; i < cfg.loads.size(); ++i)
        for (int n = 0; n < n_pre; ++n)
            in.injections(cfg.loads[i].bus - 1, n) += bundle.base_load(i, n);
    for (const auto& d : cfg.diesel) {
        const double pu = d.kw / (1000.0 * cfg.s_base_mva);
        for (int n = 0; n < n_pre; ++n) in.injections(d.bus - 1, n) += pu;
    }

    in.n_tp = dr_enabled ? 2 : 0;
    if (dr_enabled) {
        in.alpha_cons = {Eigen::MatrixXd::Zero(net.n_bus(), n_pre),
                         Eigen::MatrixXd::Zero(net.n_bus(), n_pre)};
        in.dc_bound.resize(2, n_pre);
        for (size_t i = 0; i < cfg.loads.size(); ++i) {
            const int tp = type_index(cfg.loads[i].type);
            for (int n = 0; n < n_pre; ++n)
                in.alpha_cons[tp](cfg.loads[i].bus - 1, n) -= bundle.alpha(i, n);
        }
        for (int tp = 0; tp < 2; ++tp)
            for (int n = 0; n < n_pre; ++n)
                in.dc_bound(tp, n) =
                    cfg.dr.k_adj * cfg.tariffs.buy_for_type(tp, tau_hours + n * dt_p);
        in.epsilon_cap = ps.epsilon_cap;
        in.dr_history = dr_history;
    }

    in.grid_buy.resize(n_pre);
    in.sell_price.resize(n_pre);
    for (int n = 0; n < n_pre; ++n) {
        const double hour = tau_hours + n * dt_p;
        in.grid_buy[n] = cfg.tariffs.grid_buy(hour);
        in.sell_price[n] = cfg.tariffs.sell_at(hour);
    }
    in.p_sys_max = cfg.p_sys_max_pu > 0 ? cfg.p_sys_max_pu : cfg.derived_p_sys_max();
    in.p_br_max = cfg.p_br_max_pu > 0 ? cfg.p_br_max_pu : cfg.derived_p_br_max();
    in.v_min = cfg.v_min + cfg.decision_voltage_margin;
    in.v_max = cfg.v_max - cfg.decision_voltage_margin;
    in.current_limit_scale = 1.0 - cfg.decision_current_margin;
    return in;
}

namespace {

struct Commitment {
    Eigen::VectorXd dis, ch, dc;
    double buy = 0.0, sell = 0.0;
    double gap_pct = 0.0;
    int iterations = 0;
    double solve_seconds = 0.0;
    bool fallback = false;
    double excl_buy_sell = 0.0, excl_dis_ch = 0.0;
    Eigen::VectorXd alpha_type;   // per type, consumption convention
    Eigen::VectorXd alpha_group;  // per load group, consumption convention
};

// Relaxation gap of one decision slice of a solved SOCP.
double slice_gap(const NetworkModel& net, const DecisionLayout& layout, const Eigen::VectorXd& u,
                 int s) {
    Eigen::VectorXd p(net.n_br()), l(net.n_br()), v_in(net.n_br());
    for (int e = 0; e < net.n_br(); ++e) {
        p[e] = u[layout.br_p(s, e)];
        l[e] = u[layout.br_l(s, e)];
        v_in[e] = net.branches[e].from == 1 ? 1.0 : u[layout.bus_v(s, net.branches[e].from)];
    }
    return relaxation_gap(p, l, v_in);
}

Commitment extract_commitment(const PreparedScenario& ps, const EmsMode& mode,
                              const ForecastBundle& bundle, const DecisionLayout& layout,
                              const SolverResult& r, int slice) {
    const auto& cfg = ps.sc->config;
    const int n_batt = layout.n_batt;
    Commitment c;
    c.dis.resize(n_batt);
    c.ch.resize(n_batt);
    for (int i = 0; i < n_batt; ++i) {
        c.dis[i] = r.u[layout.dis(i, slice)];
        c.ch[i] = r.u[layout.ch(i, slice)];
    }
    c.buy = r.u[layout.buy(slice)];
    c.sell = r.u[layout.sell(slice)];
    c.dc = Eigen::VectorXd::Zero(std::max(layout.n_tp, 0));
    for (int p = 0; p < layout.n_tp; ++p) c.dc[p] = r.u[layout.dc(p, slice)];
    c.iterations = r.iterations;
    c.solve_seconds = r.solve_seconds;
    c.excl_buy_sell = std::min(c.buy, c.sell);
    c.excl_dis_ch = 0.0;
    for (int i = 0; i < n_batt; ++i)
        c.excl_dis_ch = std::max(c.excl_dis_ch, std::min(c.dis[i], c.ch[i]));
    if (mode.flow == FlowModel::SOCP) c.gap_pct = slice_gap(ps.sc->network, layout, r.u, slice);

    c.alpha_type = Eigen::VectorXd::Zero(2);
    c.alpha_group = Eigen::VectorXd::Zero(bundle.alpha.rows());
    for (int g = 0; g < bundle.alpha.rows(); ++g) {
        const double cons = -bundle.alpha(g, slice);
        c.alpha_group[g] = cons;
        c.alpha_type[type_index(cfg.loads[g].type)] += cons;
    }
    return c;
}

}  // namespace

DayAheadSchedule run_day_ahead(const PreparedScenario& ps, const EmsMode& mode,
                               const SolverOptions& solver_opt) {
    const int steps = ps.steps_per_day();
    DayAheadSchedule sched;
    sched.bundle = forecast_at(ps, 0.0, steps);
    Eigen::VectorXd soc0(ps.sc->config.batteries.size());
    for (size_t i = 0; i < ps.sc->config.batteries.size(); ++i)
        soc0[i] = ps.sc->config.batteries[i].soc0;
    AssemblyInput in = make_assembly_input(ps, sched.bundle, mode.dr, 0.0, steps, soc0, 0.0);
    const ConicProgram prog = assemble_program(in, mode.flow);
    sched.solve = solve(prog, solver_opt);
    if (sched.solve.status != SolveStatus::Optimal)
        throw EmsError("day-ahead optimization failed: " +
                       std::string(to_string(sched.solve.status)));

    const DecisionLayout layout = layout_for(in, mode.flow);
    const int n_batt = layout.n_batt;
    sched.dis.resize(n_batt, steps);
    sched.ch.resize(n_batt, steps);
    sched.buy.resize(steps);
    sched.sell.resize(steps);
    sched.dc = Eigen::MatrixXd::Zero(2, steps);
    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < n_batt; ++i) {
            sched.dis(i, s) = sched.solve.u[layout.dis(i, s)];
            sched.ch(i, s) = sched.solve.u[layout.ch(i, s)];
        }
        sched.buy[s] = sched.solve.u[layout.buy(s)];
        sched.sell[s] = sched.solve.u[layout.sell(s)];
        for (int p = 0; p < layout.n_tp; ++p) sched.dc(p, s) = sched.solve.u[layout.dc(p, s)];
    }
    return sched;
}

SimulationResult run_simulation(const PreparedScenario& ps, const EmsMode& mode,
                                const SolverOptions& solver_opt) {
    const auto& cfg = ps.sc->config;
    const auto& net = ps.sc->network;
    const int k_d = ps.decision_steps();
    const int steps = ps.steps_per_day();
    const double dt_d = cfg.horizon.dt_d_hours;
    const double dt_p = cfg.horizon.dt_p_hours;
    const double s_base_kw = cfg.s_base_mva * 1000.0;
    const int n_batt = static_cast<int>(cfg.batteries.size());
    const int n_groups = static_cast<int>(cfg.loads.size());

    SimulationResult out;
    out.mode = mode;
    SimulationTrace& trace = out.trace;
    trace.dt_d_hours = dt_d;
    trace.epsilon_cap = ps.epsilon_cap;
    trace.load_alpha_history = Eigen::MatrixXd::Zero(n_groups, k_d);
    trace.load_base_realized = Eigen::MatrixXd::Zero(n_groups, k_d);
    trace.load_dr_realized = Eigen::MatrixXd::Zero(n_groups, k_d);
    trace.soc_initial.resize(n_batt);
    for (int i = 0; i < n_batt; ++i) trace.soc_initial[i] = cfg.batteries[i].soc0;

    std::optional<DayAheadSchedule> schedule;
    if (mode.policy == Policy::DayAhead) schedule = run_day_ahead(ps, mode, solver_opt);

    Eigen::VectorXd soc = trace.soc_initial;
    double dr_hist = 0.0;
    Eigen::VectorXd prev_dc = Eigen::VectorXd::Zero(2);
    // Incentives shift load levels persistently (the forecasting model is
    // integrative), so realized DR effects accumulate over the day.
    Eigen::VectorXd cum_dr = Eigen::VectorXd::Zero(n_groups);
    const int n_pre = cfg.horizon.n_pre;

    for (int k = 0; k < k_d; ++k) {
        const double tau = k * dt_d;
        Commitment c;
        if (mode.policy == Policy::DayAhead) {
            const int s = static_cast<int>(std::floor(tau / dt_p + 1e-9)) % steps;
            const DecisionLayout layout =
                mode.flow == FlowModel::SOCP
                    ? DecisionLayout::socp(steps, n_batt, net.n_br(), mode.dr ? 2 : 0)
                    : DecisionLayout::lp(steps, n_batt, mode.dr ? 2 : 0);
            c = extract_commitment(ps, mode, schedule->bundle, layout, schedule->solve, s);
            c.solve_seconds = k == 0 ? schedule->solve.solve_seconds : 0.0;
            c.iterations = schedule->solve.iterations;
        } else {
            Eigen::MatrixXd measured;
            if (k > 0) {
                measured = trace.load_base_realized.leftCols(k) +
                           trace.load_dr_realized.leftCols(k);
            }
            const ForecastBundle bundle =
                forecast_at(ps, tau, n_pre, k > 0 ? &measured : nullptr);
            AssemblyInput in = make_assembly_input(ps, bundle, mode.dr, tau, n_pre, soc, dr_hist);
            const ConicProgram prog = assemble_program(in, mode.flow);
            const SolverResult r = solve(prog, solver_opt);
            if (r.status == SolveStatus::Optimal) {
                const DecisionLayout layout = layout_for(in, mode.flow);
                c = extract_commitment(ps, mode, bundle, layout, r, 0);
            } else {
                c.fallback = true;
                c.dis = Eigen::VectorXd::Zero(n_batt);
                c.ch = Eigen::VectorXd::Zero(n_batt);
                c.dc = mode.dr ? prev_dc : Eigen::VectorXd::Zero(2);
                c.iterations = r.iterations;
                c.solve_seconds = r.solve_seconds;
                c.alpha_type = Eigen::VectorXd::Zero(2);
                c.alpha_group = Eigen::VectorXd::Zero(n_groups);
                for (int g = 0; g < n_groups; ++g) {
                    const double cons = -bundle.alpha(g, 0);
                    c.alpha_group[g] = cons;
                    c.alpha_type[type_index(cfg.loads[g].type)] += cons;
                }
            }
        }
        if (c.dc.size() == 0) c.dc = Eigen::VectorXd::Zero(2);
        prev_dc = c.dc;

        // Plant application with realized profiles; realized sensitivities
        // come from the realized base loads, not the forecasts.
        StepRecord rec;
        rec.step = k;
        rec.hour = tau;
        rec.dis = c.dis;
        rec.ch = c.ch;
        rec.dc = c.dc;
        rec.buy_planned = c.buy;
        rec.sell_planned = c.sell;
        rec.fallback = c.fallback;
        rec.gap_pct = c.gap_pct;
        rec.solver_iterations = c.iterations;
        rec.solve_seconds = c.solve_seconds;
        rec.exclusivity_buy_sell = c.excl_buy_sell;
        rec.exclusivity_dis_ch = c.excl_dis_ch;
        rec.alpha_committed = c.alpha_type;

        Eigen::VectorXd inj = Eigen::VectorXd::Zero(net.n_bus());
        const double step_pos = tau / dt_p;
        for (size_t i = 0; i < cfg.solar.size(); ++i) {
            const double rated = cfg.solar[i].rated_mw / cfg.s_base_mva;
            inj[cfg.solar[i].bus - 1] +=
                rated * sample_profile(ps.sc->profiles.solar_realized[i], step_pos);
        }
        for (int g = 0; g < n_groups; ++g) {
            const auto& load = cfg.loads[g];
            const double rated = load.rated_kw / (1000.0 * cfg.s_base_mva);
            const double base_inj =
                -rated * sample_profile(ps.sc->profiles.load_realized[g], step_pos);
            trace.load_base_realized(g, k) = base_inj;
            const int tp = type_index(load.type);
            if (mode.dr) {
                const double tariff = cfg.tariffs.buy_for_type(tp, tau);
                const double ela =
                    cfg.dr.elasticity_by_type[tp][TariffSchedule::period_of_hour(tau)];
                const double alpha_real = price_sensitivity(ela, base_inj, tariff);
                cum_dr[g] += alpha_real * c.dc[tp];
                trace.load_alpha_history(g, k) = -alpha_real;  // consumption convention
            }
            trace.load_dr_realized(g, k) = cum_dr[g];
            inj[load.bus - 1] += base_inj + cum_dr[g];
        }
        for (const auto& d : cfg.diesel) inj[d.bus - 1] += d.kw / (1000.0 * cfg.s_base_mva);
        for (int i = 0; i < n_batt; ++i)
            inj[cfg.batteries[i].bus - 1] += c.dis[i] - c.ch[i];

        rec.plant = solve_plant_powerflow(net, inj);
        rec.plant_converged = rec.plant.converged;
        if (rec.plant.converged) {
            const double slack = rec.plant.slack_power();
            rec.realized_buy = std::max(slack, 0.0);
            rec.realized_sell = std::max(-slack, 0.0);
            rec.realized_loss = rec.plant.losses;
            const auto sec = check_security(net, rec.plant, cfg.v_min, cfg.v_max, k);
            rec.voltage_violations = static_cast<int>(sec.voltage.size());
            rec.current_violations = static_cast<int>(sec.current.size());
        }

        for (int i = 0; i < n_batt; ++i)
            soc[i] = soc_after_step(soc[i], c.ch[i], c.dis[i], cfg.batteries[i], dt_d);
        rec.soc_after = soc;

        if (mode.dr)
            for (int p = 0; p < 2; ++p) dr_hist += c.alpha_type[p] * c.dc[p] * dt_d;
        rec.energy_cap_cumulative = dr_hist;

        const double buy_price = cfg.tariffs.grid_buy(tau);
        const double sell_price = cfg.tariffs.sell_at(tau);
        double cost = -sell_price * rec.realized_sell +
                      buy_price * (rec.realized_buy + rec.realized_loss);
        for (int i = 0; i < n_batt; ++i) {
            const auto& bat = cfg.batteries[i];
            cost += buy_price * (c.ch[i] * (1.0 - bat.eta_ch) + c.dis[i] * (1.0 - bat.eta_dis));
            cost += bat.c_deg * (c.ch[i] + c.dis[i]);
        }
        rec.step_cost_usd = cost * dt_d * s_base_kw;

        trace.steps.push_back(std::move(rec));
    }

    // Report
    CostReport& rep = out.report;
    rep.economic_cost = economic_cost(trace, ps);
    const DrSettlement settle = dr_settlement(trace, ps);
    rep.dr_user_cost = settle.user_cost_usd;
    if (settle.energy_change_pct.size()) {
        rep.load_change_min_pct = settle.energy_change_pct.minCoeff();
        rep.load_change_max_pct = settle.energy_change_pct.maxCoeff();
    }
    double diesel_kw = 0.0;
    for (const auto& d : cfg.diesel) diesel_kw += d.kw;
    for (int k = 0; k < k_d; ++k)
        rep.diesel_cost += cfg.tariffs.diesel_at(k * dt_d) * diesel_kw * dt_d;

    int violations = 0;
    for (const auto& s : trace.steps) {
        violations += s.voltage_violations + s.current_violations;
        if (!s.plant_converged) ++violations;
    }
    rep.violation_count = violations;
    rep.security_satisfied = violations == 0;

    if (mode.policy == Policy::DayAhead) {
        rep.decision_time_per_step = schedule->solve.solve_seconds;
    } else {
        double total = 0.0;
        for (const auto& s : trace.steps) total += s.solve_seconds;
        rep.decision_time_per_step = total / k_d;
    }
    if (mode.flow == FlowModel::SOCP) {
        double mean = 0.0;
        for (const auto& s : trace.steps) mean += s.gap_pct;
        mean /= k_d;
        double var = 0.0;
        for (const auto& s : trace.steps) var += (s.gap_pct - mean) * (s.gap_pct - mean);
        rep.gap_mean_pct = mean;
        rep.gap_std_pct = std::sqrt(var / k_d);
    }
    return out;
}

double economic_cost(const SimulationTrace& trace, const PreparedScenario&) {
    double total = 0.0;
    for (const auto& s : trace.steps) total += s.step_cost_usd;
    return total;
}

DrSettlement dr_settlement(const SimulationTrace& trace, const PreparedScenario& ps) {
    const auto& cfg = ps.sc->config;
    DrSettlement out;
    const int n_groups = static_cast<int>(cfg.loads.size());
    const double s_base_kw = cfg.s_base_mva * 1000.0;
    out.energy_change_pct = Eigen::VectorXd::Zero(n_groups);

    Eigen::VectorXd change(n_groups), base_energy(n_groups);
    change.setZero();
    base_energy.setZero();
    for (int k = 0; k < trace.n_steps(); ++k) {
        const auto& rec = trace.steps[k];
        const double tau = rec.hour;
        for (int g = 0; g < n_groups; ++g) {
            const int tp = type_index(cfg.loads[g].type);
            const double alpha_cons = trace.load_alpha_history(g, k);
            const double dc = rec.dc.size() ? rec.dc[tp] : 0.0;
            // Realized energy change integrates the persistent level shift.
            change[g] += -trace.load_dr_realized(g, k) * trace.dt_d_hours;
            base_energy[g] += std::abs(trace.load_base_realized(g, k)) * trace.dt_d_hours;
            out.user_cost_usd += cfg.tariffs.buy_for_type(tp, tau) * alpha_cons * dc *
                                 trace.dt_d_hours * s_base_kw;
        }
    }
    for (int g = 0; g < n_groups; ++g)
        out.energy_change_pct[g] =
            base_energy[g] > 0 ? 100.0 * std::abs(change[g]) / base_energy[g] : 0.0;
    return out;
}

}  // namespace mgems
