#include "mgems/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mgems/csv.hpp"

namespace mgems {

using nlohmann::json;

namespace {

uint64_t substream(uint64_t seed, uint64_t tag) {
    uint64_t x = seed * 6364136223846793005ULL + tag * 1442695040888963407ULL + 0x9E3779B97F4A7C15ULL;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    return x;
}

double bell(double h, double center, double width) {
    return std::exp(-(h - center) * (h - center) / (2.0 * width * width));
}

const char* k10BusBranches =
    "from,to,wire,length_m\n"
    "1,3,AWG2/0x2,80\n3,6,AWG8,80\n3,10,AWG4/0,80\n10,2,AWG10,80\n3,4,AWG1/0x2,80\n"
    "4,5,AWG6,80\n4,7,AWG2/0,80\n7,9,AWG10,80\n7,8,AWG6,80\n";

const char* k18BusBranches =
    "from,to,wire,length_m\n"
    "1,2,AWG750,80\n2,3,AWG750,80\n3,4,AWG600,80\n4,5,AWG350,80\n5,6,AWG350,80\n"
    "6,7,AWG1/0,120\n7,8,AWG1/0,120\n8,9,AWG1/0,120\n9,10,AWG1/0,80\n3,11,AWG6,30\n"
    "4,12,AWG1/0,30\n12,13,AWG1/0,30\n13,14,AWG1/0,30\n14,15,AWG250,30\n6,16,AWG250,30\n"
    "9,17,AWG2/0,30\n10,18,AWG1/0,30\n";

const char* k33BusBranches =
    "from,to,wire,length_m\n"
    "1,2,AWG600x3,80\n2,3,AWG350x3,80\n3,4,AWG250x3,80\n4,5,AWG250x3,80\n5,6,AWG250x3,80\n"
    "6,7,AWG2/0x2,80\n7,8,AWG2/0x2,80\n8,9,AWG2/0x2,80\n9,10,AWG2/0x2,80\n10,11,AWG1/0x2,30\n"
    "11,12,AWG2x2,30\n12,13,AWG2x2,30\n13,14,AWG4x2,30\n14,15,AWG2,30\n15,16,AWG3,30\n"
    "16,17,AWG3,30\n17,18,AWG3,30\n2,19,AWG1/0x2,30\n19,20,AWG1/0x2,30\n20,21,AWG1/0x2,30\n"
    "21,22,AWG1/0x2,30\n3,23,AWG1/0x2,30\n23,24,AWG1/0x2,30\n24,25,AWG1/0x2,30\n"
    "6,26,AWG1/0x2,30\n26,27,AWG1/0x2,30\n27,28,AWG1/0x2,30\n28,29,AWG1/0x2,30\n"
    "29,30,AWG1/0x2,30\n30,31,AWG2/0x2,30\n31,32,AWG2/0x2,30\n32,33,AWG2/0x2,30\n";

BatteryParams make_battery(int bus, double p_rated_mw, double s_base_mva) {
    BatteryParams b;
    b.bus = bus;
    b.p_rated_pu = p_rated_mw / s_base_mva;
    b.e_max_puh = b.p_rated_pu * 5.0;  // 5 h rated duration
    b.eta_ch = b.eta_dis = 0.95;
    b.soc0 = 0.3;
    b.soc_min = 0.2;
    b.soc_max = 0.9;
    b.c_deg = 0.5 * 300.0 / 5000.0;  // unit cost over cycle life
    return b;
}

DemandResponseParams default_dr(double k_adj) {
    DemandResponseParams dr;
    dr.elasticity_by_type = {{-0.10, -0.20, -0.35}, {-0.15, -0.30, -0.50}};
    dr.k_adj = k_adj;
    dr.epsilon_cap = 0.0;  // derived from the day-ahead load forecast
    return dr;
}

double seeded_residential_kw(uint64_t seed, int bus) {
    std::mt19937_64 rng(substream(seed, 0x5E5D + static_cast<uint64_t>(bus)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return 10.0 + 20.0 * unif(rng);
}

}  // namespace

double ScenarioConfig::derived_p_sys_max() const {
    double cap = 0.0;
    for (const auto& b : batteries) cap += b.p_rated_pu;
    for (const auto& s : solar) cap += s.rated_mw / s_base_mva;
    for (const auto& d : diesel) cap += d.kw / (1000.0 * s_base_mva);
    for (const auto& l : loads) cap += l.rated_kw / (1000.0 * s_base_mva);
    return std::max(2.0, 2.0 * cap);
}

double ScenarioConfig::derived_p_br_max() const { return derived_p_sys_max(); }

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"10bus", "18bus", "33bus"};
    return names;
}

Eigen::VectorXd synth_profile(uint64_t seed, ProfileKind kind, int steps) {
    Eigen::VectorXd out(steps);
    const double hps = 24.0 / steps;
    std::mt19937_64 rng(substream(seed, static_cast<uint64_t>(kind) + 0xA11CE));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    switch (kind) {
        case ProfileKind::Clear: {
            for (int s = 0; s < steps; ++s) {
                double v = bell(s * hps, 12.0, 2.8);
                out[s] = v < 1e-4 ? 0.0 : v;
            }
            break;
        }
        case ProfileKind::Cloudy: {
            // Clear bell times multiplicative dips; the first dip always sits
            // near noon so cloudy energy is strictly below clear energy.
            struct Dip {
                double center, width, depth;
            };
            std::vector<Dip> dips;
            dips.push_back({11.0 + 2.0 * unif(rng), 0.8 + 1.2 * unif(rng), 0.45 + 0.3 * unif(rng)});
            const int extra = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < extra; ++i)
                dips.push_back({8.0 + 9.0 * unif(rng), 0.6 + 1.4 * unif(rng), 0.25 + 0.45 * unif(rng)});
            for (int s = 0; s < steps; ++s) {
                const double h = s * hps;
                double v = bell(h, 12.0, 2.8);
                for (const auto& d : dips) v *= 1.0 - d.depth * bell(h, d.center, d.width);
                out[s] = v < 1e-4 ? 0.0 : v;
            }
            break;
        }
        case ProfileKind::Residential: {
            const double phase = 2.0 * M_PI * unif(rng);
            const double wobble = 0.004 + 0.004 * unif(rng);
            for (int s = 0; s < steps; ++s) {
                const double h = s * hps;
                double v = 0.22 + 0.38 * bell(h, 7.5, 1.6) + 0.78 * bell(h, 19.0, 2.2);
                v *= 1.0 + wobble * std::sin(2.0 * M_PI * h / 24.0 + phase);
                out[s] = v;
            }
            out /= out.maxCoeff();
            break;
        }
        case ProfileKind::Business: {
            const double phase = 2.0 * M_PI * unif(rng);
            const double wobble = 0.004 + 0.004 * unif(rng);
            for (int s = 0; s < steps; ++s) {
                const double h = s * hps;
                const double rise = 1.0 / (1.0 + std::exp(-(h - 8.0) / 0.8));
                const double fall = 1.0 / (1.0 + std::exp(-(17.5 - h) / 0.8));
                double v = 0.15 + 0.85 * rise * fall;
                v *= 1.0 + wobble * std::sin(2.0 * M_PI * h / 24.0 + phase);
                out[s] = v;
            }
            out /= out.maxCoeff();
            break;
        }
    }
    return out;
}

Eigen::VectorXd load_profile_csv(const std::string& path, int expected_steps, bool* rescaled) {
    auto t = csv::parse_file(path);
    const int c_step = t.column("step"), c_val = t.column("value");
    if (c_step < 0 || c_val < 0) throw ScenarioError("profile CSV header must be step,value: " + path);
    if (static_cast<int>(t.rows.size()) != expected_steps)
        throw ScenarioError("profile " + path + " has " + std::to_string(t.rows.size()) +
                            " rows, expected " + std::to_string(expected_steps));
    Eigen::VectorXd v(expected_steps);
    for (int i = 0; i < expected_steps; ++i) {
        v[i] = csv::to_double(t.rows[i][c_val], path);
        if (v[i] < 0) throw ScenarioError("negative profile value in " + path);
    }
    bool scaled = false;
    const double mx = v.maxCoeff();
    if (mx > 1.0) {
        v /= mx;
        scaled = true;
    }
    if (rescaled) *rescaled = scaled;
    return v;
}

ProfileSet build_profiles(const ScenarioConfig& cfg) {
    ProfileSet set;
    const int steps = cfg.horizon.steps_per_day();
    const int n_hist = cfg.forecast.history_days;

    if (!cfg.profiles_dir.empty()) {
        auto read_days = [&](const std::string& stem, int device) {
            std::vector<Eigen::VectorXd> days;
            for (int d = 0; d < n_hist; ++d) {
                std::ostringstream p;
                p << cfg.profiles_dir << "/" << stem << device << "_hist" << d << ".csv";
                days.push_back(load_profile_csv(p.str(), steps));
            }
            return days;
        };
        for (size_t i = 0; i < cfg.solar.size(); ++i) {
            set.solar_history.push_back(read_days("solar", static_cast<int>(i)));
            std::ostringstream p;
            p << cfg.profiles_dir << "/solar" << i << "_realized.csv";
            set.solar_realized.push_back(load_profile_csv(p.str(), steps));
        }
        for (size_t i = 0; i < cfg.loads.size(); ++i) {
            set.load_history.push_back(read_days("load", static_cast<int>(i)));
            std::ostringstream p;
            p << cfg.profiles_dir << "/load" << i << "_realized.csv";
            set.load_realized.push_back(load_profile_csv(p.str(), steps));
        }
        return set;
    }

    // Synthetic: solar history mixes strong clear days with cloudy ones so
    // the regression regresses toward optimistic output; the realized day is
    // an unseen cloudy profile.
    for (size_t i = 0; i < cfg.solar.size(); ++i) {
        std::vector<Eigen::VectorXd> days;
        for (int d = 0; d < n_hist; ++d) {
            if (d % 2 == 0) {
                const double scale = 1.0 - 0.05 * (d / 2);
                days.push_back(scale * synth_profile(substream(cfg.seed, 10 * i + d),
                                                     ProfileKind::Clear, steps));
            } else {
                days.push_back(synth_profile(substream(cfg.seed, 10 * i + d), ProfileKind::Cloudy,
                                             steps));
            }
        }
        set.solar_history.push_back(std::move(days));
        set.solar_realized.push_back(
            synth_profile(substream(cfg.seed, 1000 + i), ProfileKind::Cloudy, steps));
    }
    for (size_t i = 0; i < cfg.loads.size(); ++i) {
        const ProfileKind kind = cfg.loads[i].type == LoadType::Residential
                                     ? ProfileKind::Residential
                                     : ProfileKind::Business;
        std::vector<Eigen::VectorXd> days;
        for (int d = 0; d < n_hist; ++d)
            days.push_back(synth_profile(substream(cfg.seed, 500 + 10 * i + d), kind, steps));
        set.load_history.push_back(std::move(days));
        set.load_realized.push_back(synth_profile(substream(cfg.seed, 2000 + i), kind, steps));
    }
    return set;
}

namespace {

ScenarioConfig builtin_config(const std::string& name, uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.seed = seed;
    cfg.builtin = name;

    if (name == "10bus") {
        cfg.batteries = {make_battery(4, 0.15, cfg.s_base_mva), make_battery(10, 0.15, cfg.s_base_mva)};
        cfg.solar = {{4, 0.25}};
        cfg.loads = {{2, LoadType::Residential, 12.75, 0.9},
                     {6, LoadType::Residential, 30.0, 0.9},
                     {8, LoadType::Residential, 40.0, 0.9},
                     {9, LoadType::Residential, 12.75, 0.9},
                     {5, LoadType::Business, 42.5, 0.9},
                     {7, LoadType::Business, 61.2, 0.9}};
        cfg.dr = default_dr(0.003);
    } else if (name == "18bus") {
        cfg.batteries = {make_battery(9, 0.15, cfg.s_base_mva), make_battery(15, 0.15, cfg.s_base_mva),
                         make_battery(16, 0.15, cfg.s_base_mva)};
        cfg.solar = {{15, 0.2}, {16, 0.3}};
        cfg.diesel = {{10, 20.0, 0.85}};
        for (int bus = 2; bus <= 18; ++bus)
            cfg.loads.push_back({bus, LoadType::Residential, seeded_residential_kw(seed, bus), 0.9});
        cfg.loads.push_back({2, LoadType::Business, 60.0, 0.9});
        cfg.loads.push_back({17, LoadType::Business, 100.0, 0.9});
        cfg.dr = default_dr(0.002);
    } else if (name == "33bus") {
        cfg.batteries = {make_battery(10, 0.2, cfg.s_base_mva), make_battery(6, 0.3, cfg.s_base_mva),
                         make_battery(24, 0.3, cfg.s_base_mva), make_battery(31, 0.3, cfg.s_base_mva)};
        cfg.solar = {{6, 0.4}};
        cfg.diesel = {{33, 40.0, 0.85}, {18, 80.0, 0.85}};
        for (int bus = 2; bus <= 33; ++bus)
            cfg.loads.push_back({bus, LoadType::Residential, seeded_residential_kw(seed, bus), 0.9});
        cfg.loads.push_back({18, LoadType::Business, 80.0, 0.9});
        cfg.loads.push_back({22, LoadType::Business, 60.0, 0.9});
        cfg.loads.push_back({25, LoadType::Business, 60.0, 0.9});
        cfg.loads.push_back({33, LoadType::Business, 80.0, 0.9});
        cfg.dr = default_dr(0.001);
    } else {
        throw ScenarioError("unknown builtin case: " + name);
    }
    return cfg;
}

const char* builtin_branch_table(const std::string& name) {
    if (name == "10bus") return k10BusBranches;
    if (name == "18bus") return k18BusBranches;
    if (name == "33bus") return k33BusBranches;
    throw ScenarioError("unknown builtin case: " + name);
}

NetworkModel network_for(const ScenarioConfig& cfg) {
    WireLibrary wires = cfg.wires_csv_path.empty() ? load_wire_library(builtin_wire_csv())
                                                   : load_wire_library_file(cfg.wires_csv_path);
    std::vector<BranchRow> rows;
    if (!cfg.branches_csv_path.empty()) {
        rows = parse_branch_table_file(cfg.branches_csv_path);
    } else if (!cfg.builtin.empty()) {
        rows = parse_branch_table(builtin_branch_table(cfg.builtin));
    } else {
        throw ScenarioError("scenario needs either a builtin name or a branch table path");
    }
    return load_network(rows, wires, cfg.s_base_mva * 1e6, cfg.v_base_v, cfg.phases);
}

void validate_config(const ScenarioConfig& cfg, const NetworkModel& net) {
    auto check_bus = [&](int bus, const std::string& what) {
        if (bus < 2 || bus > net.n_bus())
            throw ScenarioError(what + " on nonexistent bus " + std::to_string(bus));
    };
    for (const auto& b : cfg.batteries) {
        check_bus(b.bus, "battery");
        b.validate();
    }
    for (const auto& s : cfg.solar) check_bus(s.bus, "solar source");
    for (const auto& d : cfg.diesel) check_bus(d.bus, "diesel unit");
    for (const auto& l : cfg.loads) check_bus(l.bus, "load group");
    if (cfg.batteries.empty()) throw ScenarioError("scenario needs at least one battery");
    const double ratio = cfg.horizon.dt_p_hours / cfg.horizon.dt_d_hours;
    if (std::abs(ratio - std::lround(ratio)) > 1e-9)
        throw ScenarioError("dt_d must divide dt_p (or equal it)");
    for (const auto& e : cfg.dr.elasticity_by_type)
        for (double v : e)
            if (v > 0) throw ScenarioError("elasticities must be <= 0");
}

}  // namespace

Scenario builtin_case(const std::string& name, uint64_t seed) {
    Scenario sc;
    sc.config = builtin_config(name, seed);
    sc.network = network_for(sc.config);
    validate_config(sc.config, sc.network);
    sc.profiles = build_profiles(sc.config);
    return sc;
}

// --------------------------------------------------------------------------
// JSON round trip

namespace {

json tariffs_to_json(const TariffSchedule& t) {
    return json{{"buy_residential", t.buy_residential},
                {"buy_business", t.buy_business},
                {"sell", t.sell},
                {"diesel", t.diesel}};
}

void tariffs_from_json(const json& j, TariffSchedule& t) {
    if (j.contains("buy_residential")) t.buy_residential = j.at("buy_residential");
    if (j.contains("buy_business")) t.buy_business = j.at("buy_business");
    if (j.contains("sell")) t.sell = j.at("sell");
    if (j.contains("diesel")) t.diesel = j.at("diesel");
}

std::string type_name(LoadType t) {
    return t == LoadType::Residential ? "residential" : "business";
}

LoadType type_from(const std::string& s) {
    if (s == "residential") return LoadType::Residential;
    if (s == "business") return LoadType::Business;
    throw ScenarioError("unknown load type '" + s + "' (expected residential|business)");
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    if (!cfg.builtin.empty()) j["builtin"] = cfg.builtin;
    j["network"] = {{"branches_csv", cfg.branches_csv_path},
                    {"wires_csv", cfg.wires_csv_path},
                    {"s_base_mva", cfg.s_base_mva},
                    {"v_base_v", cfg.v_base_v},
                    {"phase", cfg.phases == PhaseConvention::ThreePhase ? "three" : "single"}};
    j["horizon"] = {{"dt_p_hours", cfg.horizon.dt_p_hours},
                    {"dt_d_hours", cfg.horizon.dt_d_hours},
                    {"n_pre", cfg.horizon.n_pre}};
    j["batteries"] = json::array();
    for (const auto& b : cfg.batteries)
        j["batteries"].push_back({{"bus", b.bus},
                                  {"p_rated_mw", b.p_rated_pu * cfg.s_base_mva},
                                  {"duration_h", b.e_max_puh / b.p_rated_pu},
                                  {"eta_ch", b.eta_ch},
                                  {"eta_dis", b.eta_dis},
                                  {"soc0", b.soc0},
                                  {"soc_min", b.soc_min},
                                  {"soc_max", b.soc_max},
                                  {"c_deg_usd_per_kwh", b.c_deg}});
    j["solar"] = json::array();
    for (const auto& s : cfg.solar) j["solar"].push_back({{"bus", s.bus}, {"rated_mw", s.rated_mw}});
    j["diesel"] = json::array();
    for (const auto& d : cfg.diesel)
        j["diesel"].push_back({{"bus", d.bus}, {"kw", d.kw}, {"power_factor", d.power_factor}});
    j["loads"] = json::array();
    for (const auto& l : cfg.loads)
        j["loads"].push_back({{"bus", l.bus},
                              {"type", type_name(l.type)},
                              {"rated_kw", l.rated_kw},
                              {"power_factor", l.power_factor}});
    j["tariffs"] = tariffs_to_json(cfg.tariffs);
    j["dr"] = {{"enabled", cfg.dr_enabled},
               {"k_adj", cfg.dr.k_adj},
               {"elasticity_residential", cfg.dr.elasticity_by_type[0]},
               {"elasticity_business", cfg.dr.elasticity_by_type[1]},
               {"epsilon_cap_puh", cfg.dr.epsilon_cap}};
    j["limits"] = {{"v_min", cfg.v_min},
                   {"v_max", cfg.v_max},
                   {"p_sys_max_pu", cfg.p_sys_max_pu},
                   {"p_br_max_pu", cfg.p_br_max_pu},
                   {"decision_current_margin", cfg.decision_current_margin},
                   {"decision_voltage_margin", cfg.decision_voltage_margin}};
    j["forecast"] = {{"lag", cfg.forecast.lag},
                     {"history_days", cfg.forecast.history_days},
                     {"dictionary_size", cfg.forecast.dictionary_size},
                     {"sigma_grid", cfg.forecast.sigma_grid},
                     {"lambda_grid", cfg.forecast.lambda_grid},
                     {"msms_folds", cfg.forecast.msms.folds},
                     {"msms_starts", cfg.forecast.msms.starts},
                     {"msms_steps", cfg.forecast.msms.steps},
                     {"anchor_uses_rollout_value", cfg.forecast.anchor_uses_rollout_value}};
    if (!cfg.profiles_dir.empty()) j["profiles_dir"] = cfg.profiles_dir;
    return j.dump(2);
}

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario JSON parse error: ") + e.what());
    }

    ScenarioConfig cfg;
    const uint64_t seed = j.value("seed", 1ULL);
    if (j.contains("builtin")) {
        cfg = builtin_config(j.at("builtin").get<std::string>(), seed);
    }
    cfg.seed = seed;
    if (j.contains("name")) cfg.name = j.at("name");

    try {
        if (j.contains("network")) {
            const auto& n = j.at("network");
            cfg.branches_csv_path = n.value("branches_csv", cfg.branches_csv_path);
            cfg.wires_csv_path = n.value("wires_csv", cfg.wires_csv_path);
            cfg.s_base_mva = n.value("s_base_mva", cfg.s_base_mva);
            cfg.v_base_v = n.value("v_base_v", cfg.v_base_v);
            if (n.contains("phase")) {
                const std::string p = n.at("phase");
                if (p == "three") cfg.phases = PhaseConvention::ThreePhase;
                else if (p == "single") cfg.phases = PhaseConvention::SinglePhase;
                else throw ScenarioError("network.phase must be three|single");
            }
        }
        if (j.contains("horizon")) {
            const auto& h = j.at("horizon");
            cfg.horizon.dt_p_hours = h.value("dt_p_hours", cfg.horizon.dt_p_hours);
            cfg.horizon.dt_d_hours = h.value("dt_d_hours", cfg.horizon.dt_d_hours);
            cfg.horizon.n_pre = h.value("n_pre", cfg.horizon.n_pre);
        }
        if (j.contains("batteries")) {
            cfg.batteries.clear();
            for (const auto& bj : j.at("batteries")) {
                BatteryParams b = make_battery(bj.at("bus"), bj.value("p_rated_mw", 0.15),
                                               cfg.s_base_mva);
                const double duration = bj.value("duration_h", 5.0);
                b.e_max_puh = b.p_rated_pu * duration;
                b.eta_ch = bj.value("eta_ch", 0.95);
                b.eta_dis = bj.value("eta_dis", 0.95);
                b.soc0 = bj.value("soc0", 0.3);
                b.soc_min = bj.value("soc_min", 0.2);
                b.soc_max = bj.value("soc_max", 0.9);
                b.c_deg = bj.value("c_deg_usd_per_kwh", 0.03);
                cfg.batteries.push_back(b);
            }
        }
        if (j.contains("solar")) {
            cfg.solar.clear();
            for (const auto& sj : j.at("solar"))
                cfg.solar.push_back({sj.at("bus"), sj.value("rated_mw", 0.25)});
        }
        if (j.contains("diesel")) {
            cfg.diesel.clear();
            for (const auto& dj : j.at("diesel"))
                cfg.diesel.push_back(
                    {dj.at("bus"), dj.value("kw", 0.0), dj.value("power_factor", 0.85)});
        }
        if (j.contains("loads")) {
            cfg.loads.clear();
            for (const auto& lj : j.at("loads"))
                cfg.loads.push_back({lj.at("bus"), type_from(lj.value("type", "residential")),
                                     lj.value("rated_kw", 10.0), lj.value("power_factor", 0.9)});
        }
        if (j.contains("tariffs")) tariffs_from_json(j.at("tariffs"), cfg.tariffs);
        if (j.contains("dr")) {
            const auto& d = j.at("dr");
            cfg.dr_enabled = d.value("enabled", cfg.dr_enabled);
            cfg.dr.k_adj = d.value("k_adj", cfg.dr.k_adj);
            if (cfg.dr.elasticity_by_type.size() < 2) cfg.dr.elasticity_by_type.resize(2);
            if (d.contains("elasticity_residential"))
                cfg.dr.elasticity_by_type[0] = d.at("elasticity_residential");
            if (d.contains("elasticity_business"))
                cfg.dr.elasticity_by_type[1] = d.at("elasticity_business");
            cfg.dr.epsilon_cap = d.value("epsilon_cap_puh", cfg.dr.epsilon_cap);
        }
        if (j.contains("limits")) {
            const auto& l = j.at("limits");
            cfg.v_min = l.value("v_min", cfg.v_min);
            cfg.v_max = l.value("v_max", cfg.v_max);
            cfg.p_sys_max_pu = l.value("p_sys_max_pu", cfg.p_sys_max_pu);
            cfg.p_br_max_pu = l.value("p_br_max_pu", cfg.p_br_max_pu);
            cfg.decision_current_margin =
                l.value("decision_current_margin", cfg.decision_current_margin);
            cfg.decision_voltage_margin =
                l.value("decision_voltage_margin", cfg.decision_voltage_margin);
        }
        if (j.contains("forecast")) {
            const auto& f = j.at("forecast");
            cfg.forecast.lag = f.value("lag", cfg.forecast.lag);
            cfg.forecast.history_days = f.value("history_days", cfg.forecast.history_days);
            cfg.forecast.dictionary_size = f.value("dictionary_size", cfg.forecast.dictionary_size);
            if (f.contains("sigma_grid"))
                cfg.forecast.sigma_grid = f.at("sigma_grid").get<std::vector<double>>();
            if (f.contains("lambda_grid"))
                cfg.forecast.lambda_grid = f.at("lambda_grid").get<std::vector<double>>();
            cfg.forecast.msms.folds = f.value("msms_folds", cfg.forecast.msms.folds);
            cfg.forecast.msms.starts = f.value("msms_starts", cfg.forecast.msms.starts);
            cfg.forecast.msms.steps = f.value("msms_steps", cfg.forecast.msms.steps);
            cfg.forecast.anchor_uses_rollout_value =
                f.value("anchor_uses_rollout_value", cfg.forecast.anchor_uses_rollout_value);
        }
        cfg.profiles_dir = j.value("profiles_dir", cfg.profiles_dir);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario field error: ") + e.what());
    }

    Scenario sc;
    sc.config = cfg;
    sc.network = network_for(cfg);
    validate_config(cfg, sc.network);
    sc.profiles = build_profiles(cfg);
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace mgems
