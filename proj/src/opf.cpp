#include "mgems/opf.hpp"

#include <cmath>
#include <limits>

namespace mgems {

GridState solve_plant_powerflow(const NetworkModel& net, const Eigen::VectorXd& injections,
                                const PlantOptions& opt) {
    const int nbr = net.n_br();
    const int nbus = net.n_bus();
    GridState st;
    st.branch_p = Eigen::VectorXd::Zero(nbr);
    st.branch_l = Eigen::VectorXd::Zero(nbr);
    st.bus_v = Eigen::VectorXd::Ones(nbus);
    st.injections = injections;

    const auto& order = net.depth_order();

    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        // Backward: accumulate powers from the leaves, lagged l.
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int e = *it;
            const Branch& br = net.branches[e];
            double p = st.branch_l[e] * br.r_pu - injections[br.to - 1];
            for (int c : net.child_branches(br.to)) p += st.branch_p[c];
            st.branch_p[e] = p;
        }
        for (int e = 0; e < nbr; ++e) {
            const Branch& br = net.branches[e];
            st.branch_l[e] = st.branch_p[e] * st.branch_p[e] / st.bus_v[br.from - 1];
        }
        // Forward: propagate squared voltages from the slack.
        bool collapsed = false;
        for (int e : order) {
            const Branch& br = net.branches[e];
            st.bus_v[br.to - 1] = st.bus_v[br.from - 1] + st.branch_l[e] * br.r_pu * br.r_pu -
                                  2.0 * st.branch_p[e] * br.r_pu;
            if (st.bus_v[br.to - 1] <= 0.0) collapsed = true;
        }
        st.sweeps = sweep;
        if (collapsed) {
            st.converged = false;
            st.max_residual = std::numeric_limits<double>::infinity();
            return st;
        }

        double resid = 0.0;
        for (int e = 0; e < nbr; ++e) {
            const Branch& br = net.branches[e];
            double balance = st.branch_l[e] * br.r_pu - injections[br.to - 1] - st.branch_p[e];
            for (int c : net.child_branches(br.to)) balance += st.branch_p[c];
            const double volt = st.bus_v[br.from - 1] + st.branch_l[e] * br.r_pu * br.r_pu -
                                2.0 * st.branch_p[e] * br.r_pu - st.bus_v[br.to - 1];
            const double current = st.branch_p[e] * st.branch_p[e] / st.bus_v[br.from - 1] -
                                   st.branch_l[e];
            resid = std::max({resid, std::abs(balance), std::abs(volt), std::abs(current)});
        }
        st.max_residual = resid;
        if (resid <= opt.tol) {
            st.converged = true;
            break;
        }
    }

    st.losses = 0.0;
    for (int e = 0; e < nbr; ++e) st.losses += st.branch_l[e] * net.branches[e].r_pu;
    st.slack_import = 0.0;
    for (int e : net.child_branches(1)) st.slack_import += st.branch_p[e];
    return st;
}

double relaxation_gap(const Eigen::VectorXd& branch_p, const Eigen::VectorXd& branch_l,
                      const Eigen::VectorXd& v_sending) {
    const double total = branch_p.cwiseAbs().sum();
    if (total <= 1e-12) return 0.0;
    double g = 0.0;
    for (int e = 0; e < branch_p.size(); ++e) {
        const double p2 = branch_p[e] * branch_p[e];
        const double vl = v_sending[e] * branch_l[e];
        if (p2 < 1e-12 && vl < 1e-12) continue;
        g += (std::abs(branch_p[e]) / total) * (std::abs(p2 - vl) / std::max(p2, vl));
    }
    return g * 100.0;
}

double relaxation_gap(const NetworkModel& net, const GridState& state) {
    Eigen::VectorXd v_in(net.n_br());
    for (int e = 0; e < net.n_br(); ++e) v_in[e] = state.bus_v[net.branches[e].from - 1];
    return relaxation_gap(state.branch_p, state.branch_l, v_in);
}

SecurityReport check_security(const NetworkModel& net, const GridState& state, double v_min,
                              double v_max, int step, double tol) {
    SecurityReport rep;
    rep.min_v = std::numeric_limits<double>::infinity();
    for (int j = 0; j < net.n_bus(); ++j) {
        const double v = std::sqrt(std::max(state.bus_v[j], 0.0));
        rep.max_v = std::max(rep.max_v, v);
        rep.min_v = std::min(rep.min_v, v);
        if (v < v_min - tol || v > v_max + tol) rep.voltage.push_back({j + 1, step, v});
    }
    for (int e = 0; e < net.n_br(); ++e) {
        const double i = std::sqrt(std::max(state.branch_l[e], 0.0));
        const double limit = net.branches[e].i_max_pu;
        if (limit > 0) rep.max_loading = std::max(rep.max_loading, i / limit);
        if (i > limit + tol) rep.current.push_back({e, step, i});
    }
    return rep;
}

}  // namespace mgems
