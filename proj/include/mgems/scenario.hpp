#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgems/assembler.hpp"
#include "mgems/forecast.hpp"
#include "mgems/netmodel.hpp"

namespace mgems {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolarSource {
    int bus = 0;
    double rated_mw = 0.0;
};

struct DieselUnit {
    int bus = 0;
    double kw = 0.0;
    double power_factor = 0.85;  // stored, unused by the active-power plant
};

struct LoadGroup {
    int bus = 0;
    LoadType type = LoadType::Residential;
    double rated_kw = 0.0;
    double power_factor = 0.9;  // stored, unused by the active-power plant
};

enum class ProfileKind { Clear, Cloudy, Residential, Business };

/// Daily profiles per device: several historical days for forecaster
/// training plus the realized day the plant sees. All normalized to [0, 1].
struct ProfileSet {
    std::vector<std::vector<Eigen::VectorXd>> solar_history;  // per source
    std::vector<Eigen::VectorXd> solar_realized;
    std::vector<std::vector<Eigen::VectorXd>> load_history;  // per load group
    std::vector<Eigen::VectorXd> load_realized;
};

struct HorizonConfig {
    double dt_p_hours = 1.0;
    double dt_d_hours = 1.0;
    int n_pre = 24;

    int steps_per_day() const { return static_cast<int>(std::lround(24.0 / dt_p_hours)); }
    int decision_steps() const { return static_cast<int>(std::lround(24.0 / dt_d_hours)); }
};

struct ForecastConfig {
    int lag = 3;
    int history_days = 5;
    int dictionary_size = 8;
    std::vector<double> sigma_grid{0.1, 0.3, 1.0, 3.0};
    std::vector<double> lambda_grid{1e-8, 1e-6, 1e-4, 1e-2};
    MsmsConfig msms;
    bool anchor_uses_rollout_value = true;  // previous rollout value vs realized seed
};

struct ScenarioConfig {
    std::string name = "custom";
    uint64_t seed = 1;

    // Network sources: either a builtin table or CSV paths.
    std::string builtin;  // "10bus" | "18bus" | "33bus" | empty
    std::string branches_csv_path, wires_csv_path;
    double s_base_mva = 1.0;
    double v_base_v = 480.0;
    PhaseConvention phases = PhaseConvention::ThreePhase;

    HorizonConfig horizon;
    std::vector<BatteryParams> batteries;
    std::vector<SolarSource> solar;
    std::vector<DieselUnit> diesel;
    std::vector<LoadGroup> loads;
    TariffSchedule tariffs;
    DemandResponseParams dr;
    bool dr_enabled = true;
    ForecastConfig forecast;

    double v_min = 0.9, v_max = 1.1;
    double p_sys_max_pu = 0.0;  // 0 -> derived from installed capacity
    double p_br_max_pu = 0.0;   // 0 -> derived
    // Security margins applied to the decision model only; the plant checks
    // stay at the true limits.
    double decision_current_margin = 0.01;
    double decision_voltage_margin = 0.005;

    // Profile sources: synthetic by default; CSV paths override per device.
    std::string profiles_dir;  // optional; see docs/scenario_schema.md

    double derived_p_sys_max() const;
    double derived_p_br_max() const;
};

struct Scenario {
    NetworkModel network;
    ScenarioConfig config;
    ProfileSet profiles;
};

/// Paper-parameterized built-in cases. The seed drives the randomized
/// residential ratings (18/33-bus) and the synthetic profiles.
Scenario builtin_case(const std::string& name, uint64_t seed = 1);

/// Parses a JSON scenario document; a "builtin" key seeds every field from
/// the named case before overrides apply.
Scenario parse_scenario(const std::string& json_text);
Scenario parse_scenario_file(const std::string& path);

std::string serialize_config(const ScenarioConfig& cfg);

/// Deterministic daily shape generators on the prediction grid.
Eigen::VectorXd synth_profile(uint64_t seed, ProfileKind kind, int steps_per_day);

/// Reads `step,value` CSV; values outside [0, 1] are max-normalized.
Eigen::VectorXd load_profile_csv(const std::string& path, int expected_steps,
                                 bool* rescaled = nullptr);

/// Builds the profile set for a config (synthetic unless profiles_dir set).
ProfileSet build_profiles(const ScenarioConfig& cfg);

const std::vector<std::string>& builtin_names();

}  // namespace mgems
