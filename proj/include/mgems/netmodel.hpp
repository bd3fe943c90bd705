#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgems {

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Conductor data for one wire type. `parallel` is the bundle count n in a
/// "AWGk x n" table entry: resistance divides by n, ampacity multiplies by n.
struct WireSpec {
    std::string name;
    double r_ohm_per_km = 0.0;  // per single conductor
    double x_ohm_per_km = 0.0;
    double ampacity_a = 0.0;  // 75 degC rating, per single conductor
    int parallel = 1;

    double effective_r_ohm_per_km() const { return r_ohm_per_km / parallel; }
    double effective_ampacity_a() const { return ampacity_a * parallel; }
};

struct Branch {
    int from = 0;  // parent-side bus
    int to = 0;    // child-side bus
    std::string wire;
    double length_m = 0.0;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double i_max_pu = 0.0;
};

struct Bus {
    int id = 0;
    bool is_slack = false;
};

enum class PhaseConvention { ThreePhase, SinglePhase };

struct BranchRow {
    int from = 0;
    int to = 0;
    std::string wire;
    double length_m = 0.0;
};

/// Radial network in per-unit. Buses are 1-based and contiguous, bus 1 is the
/// slack. Branch order follows the input table (the assemblers index by it);
/// `depth_order` lists branch indices parent-before-child for sweep solvers.
class NetworkModel {
  public:
    NetworkModel() = default;

    double s_base_va = 1e6;
    double v_base_v = 480.0;
    PhaseConvention phases = PhaseConvention::ThreePhase;

    std::vector<Bus> buses;
    std::vector<Branch> branches;

    int n_bus() const { return static_cast<int>(buses.size()); }
    int n_br() const { return static_cast<int>(branches.size()); }

    /// Branch index feeding bus `id`, or -1 for the slack bus.
    int parent_branch(int bus_id) const { return parent_[bus_id]; }
    /// Branch indices leaving bus `id` (the set C_j).
    const std::vector<int>& child_branches(int bus_id) const { return children_[bus_id]; }
    /// Branch indices ordered so every branch appears after its parent.
    const std::vector<int>& depth_order() const { return depth_order_; }

    double z_base_ohm() const { return v_base_v * v_base_v / s_base_va; }
    double i_base_a() const;

    void build_topology();  // fills parent/children/depth_order, validates tree

  private:
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> depth_order_;
};

using WireLibrary = std::map<std::string, WireSpec>;

/// Parses `name,r_ohm_per_km,x_ohm_per_km,ampacity_a,parallel` rows.
WireLibrary load_wire_library(const std::string& csv_text);
WireLibrary load_wire_library_file(const std::string& path);

/// Builds the per-unit model from physical branch rows. Wire names of the
/// form "BASE x n" (e.g. "AWG1/0x2") resolve against "BASE" with n parallel
/// conductors when not present verbatim in the library.
NetworkModel load_network(const std::vector<BranchRow>& rows, const WireLibrary& wires,
                          double s_base_va, double v_base_v,
                          PhaseConvention phases = PhaseConvention::ThreePhase);

/// Parses `from,to,wire,length_m` rows.
std::vector<BranchRow> parse_branch_table(const std::string& csv_text);
std::vector<BranchRow> parse_branch_table_file(const std::string& path);

/// Injection sign convention: generation positive, consumption negative.
inline double per_unit_injection(double power_kw, double s_base_va) {
    if (s_base_va <= 0.0) throw NetworkError("s_base must be positive");
    return power_kw / (s_base_va / 1000.0);
}

/// Built-in conductor table (75 degC copper ratings) keyed by the AWG names
/// used in the bundled cases.
const std::string& builtin_wire_csv();

}  // namespace mgems
