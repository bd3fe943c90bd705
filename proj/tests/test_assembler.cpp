#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mgems/assembler.hpp"
#include "mgems/opf.hpp"
#include "support/pseudocode_oracle.hpp"

using namespace mgems;

namespace {

const char* k10BusTable =
    "from,to,wire,length_m\n"
    "1,3,AWG2/0x2,80\n3,6,AWG8,80\n3,10,AWG4/0,80\n10,2,AWG10,80\n3,4,AWG1/0x2,80\n"
    "4,5,AWG6,80\n4,7,AWG2/0,80\n7,9,AWG10,80\n7,8,AWG6,80\n";

NetworkModel ten_bus() {
    return load_network(parse_branch_table(k10BusTable), load_wire_library(builtin_wire_csv()),
                        1e6, 480.0);
}

BatteryParams battery(int bus, double p_rated = 0.15) {
    BatteryParams b;
    b.bus = bus;
    b.p_rated_pu = p_rated;
    b.e_max_puh = p_rated * 5.0;
    return b;
}

// A complete 10-bus assembly input with nontrivial forecasts and DR data.
AssemblyInput ten_bus_input(const NetworkModel& net, int n_pre = 24, int k = 1) {
    AssemblyInput in;
    in.net = &net;
    in.n_pre = n_pre;
    in.dt_hours = 1.0;
    in.first_day_step = k;
    in.day_steps = 24;
    in.batteries = {battery(7), battery(10)};
    in.soc_now = Eigen::VectorXd::Constant(2, 0.3);
    in.n_tp = 2;

    in.injections = Eigen::MatrixXd::Zero(net.n_bus(), n_pre);
    in.alpha_cons = {Eigen::MatrixXd::Zero(net.n_bus(), n_pre),
                     Eigen::MatrixXd::Zero(net.n_bus(), n_pre)};
    const std::vector<std::pair<int, double>> resi{{2, 12.75}, {6, 30.0}, {8, 40.0}, {9, 12.75}};
    const std::vector<std::pair<int, double>> busi{{5, 42.5}, {7, 61.2}};
    for (int s = 0; s < n_pre; ++s) {
        const double hour = (k - 1 + s) % 24;
        const double shape = 0.4 + 0.3 * std::sin(2 * M_PI * hour / 24.0);
        for (auto& [bus, kw] : resi) {
            const double load = -kw / 1000.0 * shape;
            in.injections(bus - 1, s) += load;
            in.alpha_cons[0](bus - 1, s) = -0.2 * std::abs(load) / 0.2;
        }
        for (auto& [bus, kw] : busi) {
            const double load = -kw / 1000.0 * shape;
            in.injections(bus - 1, s) += load;
            in.alpha_cons[1](bus - 1, s) = -0.3 * std::abs(load) / 0.12;
        }
        in.injections(3, s) += 0.25 * std::exp(-(hour - 12.0) * (hour - 12.0) / 8.0);  // PV at 4
    }
    in.dc_bound = Eigen::MatrixXd::Constant(2, n_pre, 0.003 * 0.35);
    in.epsilon_cap = 1e-3 * std::abs(in.injections.sum());
    in.grid_buy = Eigen::VectorXd::Constant(n_pre, 0.2);
    in.sell_price = Eigen::VectorXd::Constant(n_pre, 0.05);
    in.p_sys_max = 4.0;
    in.p_br_max = 4.0;
    return in;
}

oracles::BranchList branch_list(const NetworkModel& net) {
    oracles::BranchList ld(net.n_br(), 5);
    for (int e = 0; e < net.n_br(); ++e) {
        ld(e, 0) = e + 1;
        ld(e, 1) = net.branches[e].from;
        ld(e, 2) = net.branches[e].to;
        ld(e, 3) = net.branches[e].r_pu;
        ld(e, 4) = net.branches[e].x_pu;
    }
    return ld;
}

}  // namespace

TEST_CASE("layout dimension identities") {
    CHECK(build_layout(24, 3, 17, 2).dim() == 1464);  // 18-bus daily horizon
    CHECK(build_layout(24, 2, 9, 2).dim() == 840);    // 10-bus
    CHECK(build_layout(24, 4, 32, 2).dim() == 2592);  // 33-bus
    CHECK(build_layout(1, 1, 1, 0).dim() == 7);
    CHECK(DecisionLayout::lp(24, 3, 2).dim() == 240);  // 18-bus LP flavor
}

TEST_CASE("layout blocks are disjoint and cover the vector") {
    auto l = build_layout(4, 2, 3, 2);
    std::vector<int> hit(l.dim(), 0);
    for (int i = 0; i < l.n_batt; ++i)
        for (int s = 0; s < l.n_pre; ++s) {
            ++hit[l.dis(i, s)];
            ++hit[l.ch(i, s)];
        }
    for (int s = 0; s < l.n_pre; ++s) {
        ++hit[l.buy(s)];
        ++hit[l.sell(s)];
        for (int e = 0; e < l.n_br; ++e) {
            ++hit[l.br_p(s, e)];
            ++hit[l.br_l(s, e)];
        }
        for (int j = 2; j <= l.n_br + 1; ++j) ++hit[l.bus_v(s, j)];
        for (int p = 0; p < l.n_tp; ++p) ++hit[l.dc(p, s)];
    }
    for (int v : hit) CHECK(v == 1);
}

TEST_CASE("dimension formula holds for random counts") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
        const int n_pre = 1 + rng() % 30;
        const int n_batt = 1 + rng() % 5;
        const int n_br = 1 + rng() % 40;
        const int n_tp = rng() % 3;
        auto l = build_layout(n_pre, n_batt, n_br, n_tp);
        CHECK(l.dim() == n_pre * (2 * (1 + n_batt) + 3 * n_br + n_tp));
    }
}

TEST_CASE("tariff periods") {
    TariffSchedule t;
    CHECK(TariffSchedule::period_of_hour(0.0) == 0);
    CHECK(TariffSchedule::period_of_hour(7.99) == 0);
    CHECK(TariffSchedule::period_of_hour(8.0) == 1);
    CHECK(TariffSchedule::period_of_hour(16.0) == 2);
    CHECK(TariffSchedule::period_of_hour(20.99) == 2);
    CHECK(TariffSchedule::period_of_hour(21.0) == 1);
    CHECK(TariffSchedule::period_of_hour(25.0) == 0);  // wraps
    CHECK(t.buy_for_type(0, 17.0) == 0.35);
    CHECK(t.buy_for_type(1, 17.0) == 0.25);
    CHECK(t.sell_at(3.0) == 0.02);
}

TEST_CASE("cost vector coefficients") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 4);
    in.grid_buy.setConstant(0.35);  // peak pricing
    in.sell_price.setConstant(0.02);
    auto layout = layout_for(in, FlowModel::SOCP);
    auto f = build_cost_vector(layout, in);

    CHECK(f[layout.dis(0, 0)] == doctest::Approx(0.05 * 0.35 + 0.03).epsilon(1e-12));  // 0.0475
    CHECK(f[layout.ch(0, 0)] == doctest::Approx(0.0475).epsilon(1e-12));
    CHECK(f[layout.buy(1)] == doctest::Approx(0.35));
    CHECK(f[layout.sell(1)] == doctest::Approx(-0.02));
    for (int e = 0; e < layout.n_br; ++e)
        CHECK(f[layout.br_l(2, e)] ==
              doctest::Approx(0.35 * net.branches[e].r_pu).epsilon(1e-12));
    CHECK(f[layout.br_p(0, 0)] == 0.0);
    CHECK(f[layout.bus_v(0, 2)] == 0.0);
    CHECK(f[layout.dc(0, 0)] == 0.0);
}

TEST_CASE("zero-resistance branch has zero loss coefficient") {
    auto net = ten_bus();
    net.branches[3].r_pu = 0.0;
    auto in = ten_bus_input(net, 2);
    auto layout = layout_for(in, FlowModel::SOCP);
    auto f = build_cost_vector(layout, in);
    CHECK(f[layout.br_l(0, 3)] == 0.0);
    CHECK(f[layout.br_l(1, 3)] == 0.0);
}

TEST_CASE("bounds") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 3);
    in.dc_bound.setConstant(0.002 * 0.35);
    auto layout = layout_for(in, FlowModel::SOCP);
    Eigen::VectorXd lo, up;
    build_bounds(layout, in, lo, up);

    CHECK(up[layout.dis(0, 0)] == doctest::Approx(0.15));
    CHECK(lo[layout.dis(0, 0)] == 0.0);
    CHECK(lo[layout.bus_v(1, 5)] == doctest::Approx(0.81));
    CHECK(up[layout.bus_v(1, 5)] == doctest::Approx(1.21));
    CHECK(lo[layout.dc(0, 2)] == doctest::Approx(-0.0007));
    CHECK(up[layout.dc(0, 2)] == doctest::Approx(0.0007));
    const double imax = net.branches[0].i_max_pu;
    CHECK(up[layout.br_l(0, 0)] == doctest::Approx(imax * imax));
    CHECK(lo[layout.br_l(0, 0)] == 0.0);
    CHECK(lo[layout.br_p(0, 0)] == doctest::Approx(-in.p_br_max));
}

TEST_CASE("soc block single-step hand trace") {
    // One battery, horizon 1: dis coeff -1/(0.75*0.95), ch coeff 0.95/0.75,
    // upper rhs 0.6, lower rhs overwritten by the terminal row to 0.
    auto net = ten_bus();
    AssemblyInput in = ten_bus_input(net, 1);
    in.day_steps = 1;  // one-step day, so the terminal row is the only lower row
    in.batteries = {battery(7)};
    in.soc_now = Eigen::VectorXd::Constant(1, 0.3);
    auto layout = layout_for(in, FlowModel::SOCP);
    SpMat a;
    Eigen::VectorXd b;
    build_soc_block(layout, in, a, b);
    REQUIRE(a.rows() == 2);
    CHECK(a.coeff(0, layout.dis(0, 0)) == doctest::Approx(-1.4035087719).epsilon(1e-9));
    CHECK(a.coeff(0, layout.ch(0, 0)) == doctest::Approx(1.2666666667).epsilon(1e-9));
    CHECK(b[0] == doctest::Approx(0.6));
    CHECK(b[1] == doctest::Approx(0.0));
}

TEST_CASE("soc block row pattern and multi-battery offsets") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 5);
    auto layout = layout_for(in, FlowModel::SOCP);
    SpMat a;
    Eigen::VectorXd b;
    build_soc_block(layout, in, a, b);
    REQUIRE(a.rows() == 2 * 5 * 2);

    Eigen::MatrixXd dense(a);
    for (int t = 0; t < 5; ++t) {
        // Row t of the first battery's upper block: entries on dis/ch cols 0..t.
        CHECK((dense.row(t).array() != 0.0).count() == 2 * (t + 1));
        // Battery 2's upper block sits 2*n_pre rows and columns further.
        CHECK(dense(10 + t, layout.dis(1, t)) == dense(t, layout.dis(0, t)));
    }
    // No coupling between battery blocks.
    CHECK(dense.block(0, layout.dis(1, 0), 10, 10).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("soc terminal row moves with the decision step") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 24, 7);  // k = 7
    in.soc_now = Eigen::VectorXd::Constant(2, 0.5);
    auto layout = layout_for(in, FlowModel::SOCP);
    SpMat a;
    Eigen::VectorXd b;
    build_soc_block(layout, in, a, b);
    const int t_end = 24 - 7;  // zero-based in-day terminal index
    CHECK(b[24 + t_end] == doctest::Approx(0.5 - 0.3));
    for (int t = 0; t < 24; ++t)
        if (t != t_end) CHECK(b[24 + t] == doctest::Approx(0.5 - 0.2));
}

TEST_CASE("energy block first step and history") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 24, 1);
    auto layout = layout_for(in, FlowModel::SOCP);
    SpMat a;
    Eigen::VectorXd b;
    build_energy_block(layout, in, a, b);
    REQUIRE(b.size() == 2);
    CHECK(b[0] == doctest::Approx(in.epsilon_cap));
    CHECK(b[1] == doctest::Approx(in.epsilon_cap));
    // Rows are opposite.
    Eigen::MatrixXd dense(a);
    CHECK((dense.row(0) + dense.row(1)).cwiseAbs().maxCoeff() == 0.0);

    auto in2 = ten_bus_input(net, 24, 5);
    in2.dr_history = 0.25 * in2.epsilon_cap;
    build_energy_block(layout, in2, a, b);
    CHECK(b[0] == doctest::Approx(in2.epsilon_cap - in2.dr_history));
    CHECK(b[1] == doctest::Approx(in2.epsilon_cap + in2.dr_history));
    // Horizon wraps past day end at k = 5: the last 4 columns stay zero.
    Eigen::MatrixXd d2(a);
    for (int p = 0; p < 2; ++p)
        for (int s = 20; s < 24; ++s) CHECK(d2(0, layout.dc(p, s)) == 0.0);
    CHECK(d2(0, layout.dc(0, 19)) != 0.0);
}

TEST_CASE("cone block count and slack-parent shape") {
    auto net = ten_bus();
    auto layout = build_layout(24, 2, net.n_br(), 2);
    auto cones = build_cone_blocks(net, layout);
    CHECK(cones.size() == 24u * 9u);

    // Branch 0 leaves the slack: constant -1 in b, gamma = -1, d touches l only.
    const auto& c0 = cones[0];
    CHECK(c0.gamma == -1.0);
    CHECK(c0.b[1] == -1.0);
    CHECK(Eigen::VectorXd(c0.d)[layout.br_l(0, 0)] == 1.0);
    CHECK(Eigen::VectorXd(c0.d).cwiseAbs().sum() == 1.0);

    // Branch 1 (3->6): v_in column active.
    const auto& c1 = cones[1];
    CHECK(c1.gamma == 0.0);
    CHECK(c1.A.coeff(1, layout.bus_v(0, 3)) == 1.0);
    CHECK(Eigen::VectorXd(c1.d)[layout.bus_v(0, 3)] == 1.0);
}

TEST_CASE("grid block row recipes") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 2);
    in.injections.setZero();
    in.injections(7, 0) = -0.04;  // leaf bus 8 load
    auto layout = layout_for(in, FlowModel::SOCP);
    SpMat a;
    Eigen::VectorXd b;
    build_grid_block(net, layout, in, a, b);
    REQUIRE(a.rows() == 2 * 9 * 2);

    // Slack-adjacent branch 0 voltage row rhs is the per-unit anchor.
    CHECK(b[1] == 1.0);
    // Leaf branch 8 (7->8) power row at step 0: rhs +0.04.
    CHECK(b[2 * 8] == doctest::Approx(0.04));
    // Battery at bus 7 feeds branch 6 (4->7): +1 on dis, -1 on ch.
    CHECK(a.coeff(2 * 6, layout.dis(0, 0)) == 1.0);
    CHECK(a.coeff(2 * 6, layout.ch(0, 0)) == -1.0);
    // Power row of branch 4 (3->4) subtracts child branch powers (4->5, 4->7).
    CHECK(a.coeff(2 * 4, layout.br_p(0, 5)) == -1.0);
    CHECK(a.coeff(2 * 4, layout.br_p(0, 6)) == -1.0);
    CHECK(a.coeff(2 * 4, layout.br_p(0, 4)) == 1.0);
}

TEST_CASE("assembled program matches the literal pseudocode on the 10-bus case") {
    auto net = ten_bus();
    const int n_pre = 24;

    SUBCASE("day-ahead window, k = 1") {
        auto in = ten_bus_input(net, n_pre, 1);
        auto prog = assemble_program(in, FlowModel::SOCP);
        auto layout = layout_for(in, FlowModel::SOCP);
        REQUIRE(prog.n() == 840);

        const auto ld = branch_list(net);

        // Cones, entrywise.
        auto cells = oracles::alg3_cones(ld, n_pre, 2);
        REQUIRE(cells.size() == prog.cones.size());
        for (size_t i = 0; i < cells.size(); ++i) {
            CHECK((Eigen::MatrixXd(prog.cones[i].A) - cells[i].a).cwiseAbs().maxCoeff() == 0.0);
            CHECK((prog.cones[i].b - Eigen::VectorXd(cells[i].b)).cwiseAbs().maxCoeff() == 0.0);
            CHECK((Eigen::VectorXd(prog.cones[i].d) - cells[i].d).cwiseAbs().maxCoeff() == 0.0);
            CHECK(prog.cones[i].gamma == cells[i].gamma);
        }

        // Grid rows, entrywise. The assembled program appends per-step slack
        // balance rows after them (the branch-row recipe alone leaves the
        // main-grid exchange unconstrained).
        Eigen::MatrixXd a_grid;
        Eigen::VectorXd b_grid;
        oracles::alg4_grid(ld, n_pre, 2, {7, 10}, {2, 6, 8, 9}, {5, 7}, in.alpha_cons[0],
                           in.alpha_cons[1], in.injections, a_grid, b_grid);
        REQUIRE(prog.a_eq.rows() == a_grid.rows() + n_pre);
        CHECK((Eigen::MatrixXd(prog.a_eq).topRows(a_grid.rows()) - a_grid).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK((prog.b_eq.head(b_grid.size()) - b_grid).cwiseAbs().maxCoeff() == 0.0);

        // Slack rows: buy - sell - flows out of bus 1.
        CHECK(prog.a_eq.coeff(a_grid.rows() + 3, layout.buy(3)) == 1.0);
        CHECK(prog.a_eq.coeff(a_grid.rows() + 3, layout.sell(3)) == -1.0);
        CHECK(prog.a_eq.coeff(a_grid.rows() + 3, layout.br_p(3, 0)) == -1.0);

        // SoC rows, entrywise.
        Eigen::MatrixXd a_soc;
        Eigen::VectorXd b_soc;
        oracles::alg1_soc(n_pre, layout.dim(), in.batteries, in.soc_now, 1, in.dt_hours, a_soc,
                          b_soc);
        CHECK((Eigen::MatrixXd(prog.a_ineq).topRows(a_soc.rows()) - a_soc).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK((prog.b_ineq.head(b_soc.size()) - b_soc).cwiseAbs().maxCoeff() == 0.0);

        // Energy rows, entrywise.
        Eigen::MatrixXd a_e;
        Eigen::VectorXd b_e;
        oracles::alg2_energy(n_pre, 24, net.n_br(), 2, in.dt_hours, 1, in.alpha_cons[0],
                             in.alpha_cons[1], in.injections, Eigen::VectorXd::Zero(24),
                             Eigen::VectorXd::Zero(24), a_e, b_e);
        // The oracle caps at 0.1% of load energy; feed the same epsilon.
        AssemblyInput in_eps = in;
        in_eps.epsilon_cap = 1e-3 * std::abs(in.injections.sum() * in.dt_hours);
        auto prog_eps = assemble_program(in_eps, FlowModel::SOCP);
        CHECK((Eigen::MatrixXd(prog_eps.a_ineq).bottomRows(2) - a_e).cwiseAbs().maxCoeff() == 0.0);
        CHECK((prog_eps.b_ineq.tail(2) - b_e).cwiseAbs().maxCoeff() < 1e-15);
    }

    SUBCASE("mid-day step with incentive history, k = 9") {
        const int k = 9;
        auto in = ten_bus_input(net, n_pre, k);

        // SoC terminal row placement at k > 1.
        auto layout = layout_for(in, FlowModel::SOCP);
        SpMat a_soc_sp;
        Eigen::VectorXd b_soc_sp;
        build_soc_block(layout, in, a_soc_sp, b_soc_sp);
        Eigen::MatrixXd a_soc;
        Eigen::VectorXd b_soc;
        oracles::alg1_soc(n_pre, layout.dim(), in.batteries, in.soc_now, k, in.dt_hours, a_soc,
                          b_soc);
        CHECK((Eigen::MatrixXd(a_soc_sp) - a_soc).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b_soc_sp - b_soc).cwiseAbs().maxCoeff() == 0.0);

        // Energy rows: day-indexed alpha slices with zero padding + history.
        Eigen::VectorXd dc_resi = Eigen::VectorXd::Zero(24), dc_busi = Eigen::VectorXd::Zero(24);
        std::mt19937_64 rng(91);
        std::uniform_real_distribution<double> unif(-7e-4, 7e-4);
        for (int i = 0; i < k - 1; ++i) {
            dc_resi[i] = unif(rng);
            dc_busi[i] = unif(rng);
        }
        // Day-indexed alpha matrices for the oracle: columns 1..24 belong to
        // day steps; the bundle's horizon column s corresponds to day step
        // k + s while it stays within the day.
        Eigen::MatrixXd alpha_resi_day = Eigen::MatrixXd::Zero(net.n_bus(), 24);
        Eigen::MatrixXd alpha_busi_day = Eigen::MatrixXd::Zero(net.n_bus(), 24);
        for (int s = 0; s < 24; ++s) {
            const int day = k - 1 + s;
            if (day < 24) {
                alpha_resi_day.col(day) = in.alpha_cons[0].col(s);
                alpha_busi_day.col(day) = in.alpha_cons[1].col(s);
            }
        }
        double hist = 0.0;
        for (int i = 0; i < k - 1; ++i)
            hist += (alpha_resi_day.col(i).sum() * dc_resi[i] +
                     alpha_busi_day.col(i).sum() * dc_busi[i]) *
                    in.dt_hours;
        in.dr_history = hist;
        in.epsilon_cap = 1e-3 * std::abs(in.injections.sum() * in.dt_hours);

        SpMat a_e_sp;
        Eigen::VectorXd b_e_sp;
        build_energy_block(layout, in, a_e_sp, b_e_sp);
        Eigen::MatrixXd a_e;
        Eigen::VectorXd b_e;
        oracles::alg2_energy(n_pre, 24, net.n_br(), 2, in.dt_hours, k, alpha_resi_day,
                             alpha_busi_day, in.injections, dc_resi, dc_busi, a_e, b_e);
        CHECK((Eigen::MatrixXd(a_e_sp) - a_e).cwiseAbs().maxCoeff() == 0.0);
        CHECK((b_e_sp - b_e).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("LP mode shape") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 24);
    auto prog = assemble_program(in, FlowModel::LP);
    CHECK(prog.n() == 24 * (2 * 3 + 2));  // 192 columns for two batteries
    CHECK(prog.cones.empty());
    CHECK(prog.a_eq.rows() == 24);

    // Aggregate balance: buy - sell + dis - ch + DR = -sum of injections.
    auto layout = layout_for(in, FlowModel::LP);
    CHECK(prog.a_eq.coeff(3, layout.buy(3)) == 1.0);
    CHECK(prog.a_eq.coeff(3, layout.sell(3)) == -1.0);
    CHECK(prog.a_eq.coeff(3, layout.dis(1, 3)) == 1.0);
    CHECK(prog.a_eq.coeff(3, layout.ch(1, 3)) == -1.0);
    CHECK(prog.b_eq[3] == doctest::Approx(-in.injections.col(3).sum()));
    // Cumulative DR columns up to the row's step.
    CHECK(prog.a_eq.coeff(3, layout.dc(0, 3)) ==
          doctest::Approx(-in.alpha_cons[0].col(3).sum()));
    CHECK(prog.a_eq.coeff(3, layout.dc(0, 4)) == 0.0);
}

TEST_CASE("no DR types drops incentive rows and columns") {
    auto net = ten_bus();
    auto in = ten_bus_input(net, 6);
    in.n_tp = 0;
    in.alpha_cons.clear();
    in.dc_bound.resize(0, 0);
    auto prog = assemble_program(in, FlowModel::SOCP);
    CHECK(prog.n() == 6 * (2 * 3 + 3 * 9));
    // Only SoC rows remain in the inequality block.
    CHECK(prog.a_ineq.rows() == 2 * 6 * 2);
}

TEST_CASE("feasibility embedding: plant solutions satisfy the assembled constraints") {
    auto net = ten_bus();
    const int n_pre = 3;
    auto in = ten_bus_input(net, n_pre);
    auto prog = assemble_program(in, FlowModel::SOCP);
    auto layout = layout_for(in, FlowModel::SOCP);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.dim());
    for (int s = 0; s < n_pre; ++s) {
        auto st = solve_plant_powerflow(net, in.injections.col(s));
        REQUIRE(st.converged);
        for (int e = 0; e < net.n_br(); ++e) {
            u[layout.br_p(s, e)] = st.branch_p[e];
            u[layout.br_l(s, e)] = st.branch_l[e];
        }
        for (int j = 2; j <= net.n_bus(); ++j) u[layout.bus_v(s, j)] = st.bus_v[j - 1];
        const double slack = st.slack_power();
        u[layout.buy(s)] = std::max(slack, 0.0);
        u[layout.sell(s)] = std::max(-slack, 0.0);
    }

    CHECK((prog.a_eq * u - prog.b_eq).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(((prog.a_ineq * u - prog.b_ineq).array() < 1e-12).all());
    for (const auto& c : prog.cones) {
        const double lhs = (c.A * u - c.b).norm();
        const double rhs = Eigen::VectorXd(c.d).dot(u) - c.gamma;
        CHECK(lhs <= rhs + 1e-9);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));  // equality manifold
    }
    for (int j = 0; j < layout.dim(); ++j) {
        CHECK(u[j] >= prog.lower[j] - 1e-12);
        CHECK(u[j] <= prog.upper[j] + 1e-12);
    }
}
