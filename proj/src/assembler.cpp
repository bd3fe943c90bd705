#include "mgems/assembler.hpp"

#include <cmath>

namespace mgems {

DecisionLayout DecisionLayout::socp(int n_pre, int n_batt, int n_br, int n_tp) {
    if (n_pre < 1 || n_batt < 1 || n_br < 1 || n_tp < 0)
        throw AssemblyError("layout counts must be >= 1 (n_tp may be 0)");
    DecisionLayout l;
    l.n_pre = n_pre;
    l.n_batt = n_batt;
    l.n_br = n_br;
    l.n_tp = n_tp;
    return l;
}

DecisionLayout DecisionLayout::lp(int n_pre, int n_batt, int n_tp) {
    if (n_pre < 1 || n_batt < 1 || n_tp < 0)
        throw AssemblyError("layout counts must be >= 1 (n_tp may be 0)");
    DecisionLayout l;
    l.n_pre = n_pre;
    l.n_batt = n_batt;
    l.n_br = 0;
    l.n_tp = n_tp;
    return l;
}

DecisionLayout build_layout(int n_pre, int n_batt, int n_br, int n_tp) {
    return DecisionLayout::socp(n_pre, n_batt, n_br, n_tp);
}

int TariffSchedule::period_of_hour(double hour) {
    double h = std::fmod(hour, 24.0);
    if (h < 0) h += 24.0;
    if (h < 8.0) return 0;
    if (h < 16.0) return 1;
    if (h < 21.0) return 2;
    return 1;
}

double TariffSchedule::buy_for_type(int type, double hour) const {
    const int p = period_of_hour(hour);
    if (type == static_cast<int>(LoadType::Residential)) return buy_residential[p];
    if (type == static_cast<int>(LoadType::Business)) return buy_business[p];
    throw AssemblyError("unknown load type index " + std::to_string(type));
}

void BatteryParams::validate() const {
    if (!(0.0 <= soc_min && soc_min < soc0 && soc0 < soc_max && soc_max <= 1.0))
        throw AssemblyError("battery SoC parameters must satisfy 0 <= min < initial < max <= 1");
    if (!(eta_ch > 0 && eta_ch <= 1 && eta_dis > 0 && eta_dis <= 1))
        throw AssemblyError("battery efficiencies must lie in (0, 1]");
    if (p_rated_pu <= 0 || e_max_puh <= 0) throw AssemblyError("battery ratings must be positive");
}

void AssemblyInput::validate() const {
    if (!net) throw AssemblyError("network missing");
    if (n_pre < 1) throw AssemblyError("horizon must be >= 1");
    if (batteries.empty()) throw AssemblyError("at least one battery expected");
    if (soc_now.size() != static_cast<int>(batteries.size()))
        throw AssemblyError("soc_now size mismatch");
    for (const auto& b : batteries) {
        b.validate();
        if (b.bus < 2 || b.bus > net->n_bus())
            throw AssemblyError("unknown battery bus " + std::to_string(b.bus));
    }
    if (injections.rows() != net->n_bus() || injections.cols() != n_pre)
        throw AssemblyError("injection matrix must be n_bus x n_pre");
    if (static_cast<int>(alpha_cons.size()) != n_tp)
        throw AssemblyError("alpha matrices must match n_tp");
    for (const auto& a : alpha_cons)
        if (a.rows() != net->n_bus() || a.cols() != n_pre)
            throw AssemblyError("alpha matrix must be n_bus x n_pre");
    if (n_tp > 0 && (dc_bound.rows() != n_tp || dc_bound.cols() != n_pre))
        throw AssemblyError("dc_bound must be n_tp x n_pre");
    if (grid_buy.size() != n_pre || sell_price.size() != n_pre)
        throw AssemblyError("price vectors must have n_pre entries");
    if (first_day_step < 1 || first_day_step > day_steps)
        throw AssemblyError("first_day_step out of range");
}

DecisionLayout layout_for(const AssemblyInput& in, FlowModel mode) {
    const int n_batt = static_cast<int>(in.batteries.size());
    if (mode == FlowModel::SOCP)
        return DecisionLayout::socp(in.n_pre, n_batt, in.net->n_br(), in.n_tp);
    return DecisionLayout::lp(in.n_pre, n_batt, in.n_tp);
}

Eigen::VectorXd build_cost_vector(const DecisionLayout& layout, const AssemblyInput& in) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(layout.dim());
    const double dt = in.dt_hours;
    for (int i = 0; i < layout.n_batt; ++i) {
        const auto& bat = in.batteries[i];
        for (int s = 0; s < layout.n_pre; ++s) {
            f[layout.dis(i, s)] = dt * ((1.0 - bat.eta_dis) * in.grid_buy[s] + bat.c_deg);
            f[layout.ch(i, s)] = dt * ((1.0 - bat.eta_ch) * in.grid_buy[s] + bat.c_deg);
        }
    }
    for (int s = 0; s < layout.n_pre; ++s) {
        f[layout.buy(s)] = dt * in.grid_buy[s];
        f[layout.sell(s)] = -dt * in.sell_price[s];
    }
    if (layout.has_grid_vars()) {
        // Losses are priced as extra purchases on the l columns.
        for (int s = 0; s < layout.n_pre; ++s)
            for (int e = 0; e < layout.n_br; ++e)
                f[layout.br_l(s, e)] = dt * in.grid_buy[s] * in.net->branches[e].r_pu;
    }
    return f;
}

void build_bounds(const DecisionLayout& layout, const AssemblyInput& in, Eigen::VectorXd& lower,
                  Eigen::VectorXd& upper) {
    lower = Eigen::VectorXd::Zero(layout.dim());
    upper = Eigen::VectorXd::Zero(layout.dim());
    for (int i = 0; i < layout.n_batt; ++i) {
        for (int s = 0; s < layout.n_pre; ++s) {
            upper[layout.dis(i, s)] = in.batteries[i].p_rated_pu;
            upper[layout.ch(i, s)] = in.batteries[i].p_rated_pu;
        }
    }
    for (int s = 0; s < layout.n_pre; ++s) {
        upper[layout.buy(s)] = in.p_sys_max;
        upper[layout.sell(s)] = in.p_sys_max;
    }
    if (layout.has_grid_vars()) {
        for (int s = 0; s < layout.n_pre; ++s) {
            for (int e = 0; e < layout.n_br; ++e) {
                lower[layout.br_p(s, e)] = -in.p_br_max;
                upper[layout.br_p(s, e)] = in.p_br_max;
                const double imax = in.current_limit_scale * in.net->branches[e].i_max_pu;
                upper[layout.br_l(s, e)] = imax * imax;
            }
            for (int j = 2; j <= in.net->n_bus(); ++j) {
                lower[layout.bus_v(s, j)] = in.v_min * in.v_min;
                upper[layout.bus_v(s, j)] = in.v_max * in.v_max;
            }
        }
    }
    for (int p = 0; p < layout.n_tp; ++p) {
        for (int s = 0; s < layout.n_pre; ++s) {
            lower[layout.dc(p, s)] = -in.dc_bound(p, s);
            upper[layout.dc(p, s)] = in.dc_bound(p, s);
        }
    }
}

void build_soc_block(const DecisionLayout& layout, const AssemblyInput& in, SpMat& a,
                     Eigen::VectorXd& b) {
    const int n = layout.n_pre;
    const int rows = 2 * n * layout.n_batt;
    b.resize(rows);
    std::vector<Triplet> trips;
    for (int i = 0; i < layout.n_batt; ++i) {
        const auto& bat = in.batteries[i];
        const double dis_c = in.dt_hours / (bat.e_max_puh * bat.eta_dis);
        const double ch_c = bat.eta_ch * in.dt_hours / bat.e_max_puh;
        const int row0 = i * 2 * n;
        for (int t = 0; t < n; ++t) {
            for (int d = 0; d <= t; ++d) {
                trips.emplace_back(row0 + t, layout.dis(i, d), -dis_c);
                trips.emplace_back(row0 + t, layout.ch(i, d), ch_c);
                trips.emplace_back(row0 + n + t, layout.dis(i, d), dis_c);
                trips.emplace_back(row0 + n + t, layout.ch(i, d), -ch_c);
            }
            b[row0 + t] = bat.soc_max - in.soc_now[i];
            b[row0 + n + t] = in.soc_now[i] - bat.soc_min;
        }
        // The lower row covering the final in-day step also carries the
        // terminal sustainability requirement sigma_end >= sigma_0.
        const int t_end = in.day_steps - in.first_day_step;
        if (t_end >= 0 && t_end < n) b[row0 + n + t_end] = in.soc_now[i] - bat.soc0;
    }
    a.resize(rows, layout.dim());
    a.setFromTriplets(trips.begin(), trips.end());
}

void build_energy_block(const DecisionLayout& layout, const AssemblyInput& in, SpMat& a,
                        Eigen::VectorXd& b) {
    if (layout.n_tp == 0) {
        a.resize(0, layout.dim());
        b.resize(0);
        return;
    }
    const int in_day = std::min(layout.n_pre, in.day_steps - in.first_day_step + 1);
    std::vector<Triplet> trips;
    for (int p = 0; p < layout.n_tp; ++p) {
        for (int s = 0; s < in_day; ++s) {
            const double sum = in.alpha_cons[p].col(s).sum() * in.dt_hours;
            trips.emplace_back(0, layout.dc(p, s), sum);
            trips.emplace_back(1, layout.dc(p, s), -sum);
        }
    }
    a.resize(2, layout.dim());
    a.setFromTriplets(trips.begin(), trips.end());
    b.resize(2);
    b << in.epsilon_cap - in.dr_history, in.epsilon_cap + in.dr_history;
}

std::vector<ConeBlock> build_cone_blocks(const NetworkModel& net, const DecisionLayout& layout) {
    std::vector<ConeBlock> cones;
    cones.reserve(static_cast<size_t>(layout.n_pre) * layout.n_br);
    const int dim = layout.dim();
    for (int s = 0; s < layout.n_pre; ++s) {
        for (int e = 0; e < layout.n_br; ++e) {
            const Branch& br = net.branches[e];
            ConeBlock c;
            c.A.resize(2, dim);
            c.b = Eigen::VectorXd::Zero(2);
            c.d.resize(dim);
            c.A.insert(0, layout.br_p(s, e)) = 2.0;
            if (br.from == 1) {
                c.b[1] = -1.0;
                c.gamma = -1.0;
            } else {
                c.A.insert(1, layout.bus_v(s, br.from)) = 1.0;
                c.d.coeffRef(layout.bus_v(s, br.from)) = 1.0;
            }
            c.A.coeffRef(1, layout.br_l(s, e)) = -1.0;
            c.d.coeffRef(layout.br_l(s, e)) = 1.0;
            cones.push_back(std::move(c));
        }
    }
    return cones;
}

void build_grid_block(const NetworkModel& net, const DecisionLayout& layout,
                      const AssemblyInput& in, SpMat& a, Eigen::VectorXd& b) {
    const int nbr = layout.n_br;
    const int rows = 2 * nbr * layout.n_pre;
    b = Eigen::VectorXd::Zero(rows);
    std::vector<Triplet> trips;

    // Battery bus -> battery indices feeding that bus's parent-branch row.
    std::vector<std::vector<int>> batt_at(net.n_bus() + 1);
    for (size_t i = 0; i < in.batteries.size(); ++i) batt_at[in.batteries[i].bus].push_back(i);

    for (int s = 0; s < layout.n_pre; ++s) {
        const int base = s * 2 * nbr;
        for (int e = 0; e < nbr; ++e) {
            const Branch& br = net.branches[e];
            const int p_row = base + 2 * e;
            const int v_row = base + 2 * e + 1;

            trips.emplace_back(p_row, layout.br_p(s, e), 1.0);
            for (int c : net.child_branches(br.to))
                trips.emplace_back(p_row, layout.br_p(s, c), -1.0);
            trips.emplace_back(p_row, layout.br_l(s, e), -br.r_pu);
            b[p_row] = -in.injections(br.to - 1, s);

            for (int i : batt_at[br.to]) {
                trips.emplace_back(p_row, layout.dis(i, s), 1.0);
                trips.emplace_back(p_row, layout.ch(i, s), -1.0);
            }
            // Cumulative incentive contribution of the load at the receiving
            // bus (consumption-convention alpha enters negated).
            for (int p = 0; p < layout.n_tp; ++p) {
                for (int i = 0; i <= s; ++i) {
                    const double alpha = in.alpha_cons[p](br.to - 1, i);
                    if (alpha != 0.0) trips.emplace_back(p_row, layout.dc(p, i), -alpha);
                }
            }

            trips.emplace_back(v_row, layout.bus_v(s, br.to), 1.0);
            if (br.from == 1) {
                b[v_row] = 1.0;
            } else {
                trips.emplace_back(v_row, layout.bus_v(s, br.from), -1.0);
            }
            trips.emplace_back(v_row, layout.br_l(s, e), -br.r_pu * br.r_pu);
            trips.emplace_back(v_row, layout.br_p(s, e), 2.0 * br.r_pu);
        }
    }
    a.resize(rows, layout.dim());
    a.setFromTriplets(trips.begin(), trips.end());
}

void build_slack_block(const NetworkModel& net, const DecisionLayout& layout,
                       const AssemblyInput& in, SpMat& a, Eigen::VectorXd& b) {
    const int n = layout.n_pre;
    std::vector<Triplet> trips;
    b.resize(n);
    for (int s = 0; s < n; ++s) {
        trips.emplace_back(s, layout.buy(s), 1.0);
        trips.emplace_back(s, layout.sell(s), -1.0);
        for (int e : net.child_branches(1)) trips.emplace_back(s, layout.br_p(s, e), -1.0);
        b[s] = -in.injections(0, s);
    }
    a.resize(n, layout.dim());
    a.setFromTriplets(trips.begin(), trips.end());
}

namespace {

// LP flavor: one aggregate balance row per step, no network variables.
void build_lp_balance(const DecisionLayout& layout, const AssemblyInput& in, SpMat& a,
                      Eigen::VectorXd& b) {
    const int n = layout.n_pre;
    std::vector<Triplet> trips;
    b = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        trips.emplace_back(s, layout.buy(s), 1.0);
        trips.emplace_back(s, layout.sell(s), -1.0);
        for (int i = 0; i < layout.n_batt; ++i) {
            trips.emplace_back(s, layout.dis(i, s), 1.0);
            trips.emplace_back(s, layout.ch(i, s), -1.0);
        }
        for (int p = 0; p < layout.n_tp; ++p) {
            for (int i = 0; i <= s; ++i) {
                const double alpha = in.alpha_cons[p].col(i).sum();
                if (alpha != 0.0) trips.emplace_back(s, layout.dc(p, i), -alpha);
            }
        }
        b[s] = -in.injections.col(s).sum();
    }
    a.resize(n, layout.dim());
    a.setFromTriplets(trips.begin(), trips.end());
}

SpMat vstack(const SpMat& top, const SpMat& bottom) {
    SpMat out(top.rows() + bottom.rows(), top.cols());
    std::vector<Triplet> trips;
    trips.reserve(top.nonZeros() + bottom.nonZeros());
    for (int k = 0; k < top.outerSize(); ++k)
        for (SpMat::InnerIterator it(top, k); it; ++it)
            trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < bottom.outerSize(); ++k)
        for (SpMat::InnerIterator it(bottom, k); it; ++it)
            trips.emplace_back(top.rows() + it.row(), it.col(), it.value());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

}  // namespace

ConicProgram assemble_program(const AssemblyInput& in, FlowModel mode) {
    in.validate();
    const DecisionLayout layout = layout_for(in, mode);

    ConicProgram prog;
    prog.cost = build_cost_vector(layout, in);
    build_bounds(layout, in, prog.lower, prog.upper);

    SpMat a_soc, a_energy;
    Eigen::VectorXd b_soc, b_energy;
    build_soc_block(layout, in, a_soc, b_soc);
    build_energy_block(layout, in, a_energy, b_energy);
    prog.a_ineq = vstack(a_soc, a_energy);
    prog.b_ineq.resize(b_soc.size() + b_energy.size());
    prog.b_ineq << b_soc, b_energy;

    if (mode == FlowModel::SOCP) {
        SpMat a_grid, a_slack;
        Eigen::VectorXd b_grid, b_slack;
        build_grid_block(*in.net, layout, in, a_grid, b_grid);
        build_slack_block(*in.net, layout, in, a_slack, b_slack);
        prog.a_eq = vstack(a_grid, a_slack);
        prog.b_eq.resize(b_grid.size() + b_slack.size());
        prog.b_eq << b_grid, b_slack;
        prog.cones = build_cone_blocks(*in.net, layout);
    } else {
        build_lp_balance(layout, in, prog.a_eq, prog.b_eq);
    }
    prog.validate();
    return prog;
}

}  // namespace mgems
