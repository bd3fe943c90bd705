#include "mgems/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "mgems/csv.hpp"

namespace mgems {

double NetworkModel::i_base_a() const {
    if (phases == PhaseConvention::ThreePhase) return s_base_va / (std::sqrt(3.0) * v_base_v);
    return s_base_va / v_base_v;
}

void NetworkModel::build_topology() {
    const int nb = n_bus();
    parent_.assign(nb + 1, -1);
    children_.assign(nb + 1, {});
    depth_order_.clear();

    for (int e = 0; e < n_br(); ++e) {
        const Branch& br = branches[e];
        if (br.from < 1 || br.from > nb || br.to < 1 || br.to > nb)
            throw NetworkError("branch bus id out of range: " + std::to_string(br.from) + "-" +
                               std::to_string(br.to));
        if (br.from == br.to) throw NetworkError("self-loop branch at bus " + std::to_string(br.from));
        if (parent_[br.to] != -1)
            throw NetworkError("bus " + std::to_string(br.to) +
                               " has two parent branches (network is not radial)");
        if (br.to == 1) throw NetworkError("slack bus cannot have a parent branch");
        parent_[br.to] = e;
        children_[br.from].push_back(e);
    }

    if (n_bus() != n_br() + 1)
        throw NetworkError("bus/branch counts do not form a tree: " + std::to_string(n_bus()) +
                           " buses, " + std::to_string(n_br()) + " branches");

    // BFS from the slack; any unreached bus means a disconnected (hence, with
    // the count identity above, cyclic) component.
    std::deque<int> queue{1};
    std::vector<bool> seen(nb + 1, false);
    seen[1] = true;
    while (!queue.empty()) {
        const int j = queue.front();
        queue.pop_front();
        for (int e : children_[j]) {
            depth_order_.push_back(e);
            const int to = branches[e].to;
            if (seen[to]) throw NetworkError("cycle detected at bus " + std::to_string(to));
            seen[to] = true;
            queue.push_back(to);
        }
    }
    for (int j = 1; j <= nb; ++j)
        if (!seen[j]) throw NetworkError("bus " + std::to_string(j) + " is unreachable from the slack");
}

WireLibrary load_wire_library(const std::string& csv_text) {
    WireLibrary lib;
    auto t = csv::parse_string(csv_text);
    const int c_name = t.column("name"), c_r = t.column("r_ohm_per_km"), c_x = t.column("x_ohm_per_km"),
              c_a = t.column("ampacity_a"), c_p = t.column("parallel");
    if (c_name < 0 || c_r < 0 || c_x < 0 || c_a < 0 || c_p < 0)
        throw NetworkError("wire library header must be name,r_ohm_per_km,x_ohm_per_km,ampacity_a,parallel");
    for (const auto& row : t.rows) {
        WireSpec w;
        w.name = row[c_name];
        w.r_ohm_per_km = csv::to_double(row[c_r], "wire " + w.name);
        w.x_ohm_per_km = csv::to_double(row[c_x], "wire " + w.name);
        w.ampacity_a = csv::to_double(row[c_a], "wire " + w.name);
        w.parallel = static_cast<int>(csv::to_long(row[c_p], "wire " + w.name));
        if (w.r_ohm_per_km <= 0 || w.ampacity_a <= 0 || w.parallel < 1)
            throw NetworkError("invalid wire spec: " + w.name);
        lib[w.name] = w;
    }
    return lib;
}

WireLibrary load_wire_library_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NetworkError("cannot open wire library: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_wire_library(buf.str());
}

namespace {

// Resolves "BASExn" / "BASE x n" bundle names against the base wire entry.
WireSpec resolve_wire(const std::string& name, const WireLibrary& wires) {
    auto it = wires.find(name);
    if (it != wires.end()) return it->second;

    const auto xpos = name.find_last_of("x*");
    if (xpos != std::string::npos && xpos + 1 < name.size()) {
        std::string base = name.substr(0, xpos);
        while (!base.empty() && (base.back() == ' ' || base.back() == '\t')) base.pop_back();
        const std::string count = name.substr(xpos + 1);
        auto bit = wires.find(base);
        if (bit != wires.end()) {
            try {
                const long n = csv::to_long(count, "wire bundle " + name);
                if (n >= 1) {
                    WireSpec w = bit->second;
                    w.name = name;
                    w.parallel *= static_cast<int>(n);
                    return w;
                }
            } catch (const std::runtime_error&) {
                // fall through to the unknown-wire error
            }
        }
    }
    throw NetworkError("unknown wire name: " + name);
}

}  // namespace

NetworkModel load_network(const std::vector<BranchRow>& rows, const WireLibrary& wires,
                          double s_base_va, double v_base_v, PhaseConvention phases) {
    if (s_base_va <= 0 || v_base_v <= 0) throw NetworkError("bases must be positive");
    NetworkModel net;
    net.s_base_va = s_base_va;
    net.v_base_v = v_base_v;
    net.phases = phases;

    int max_bus = 0;
    std::set<std::pair<int, int>> edges;
    for (const auto& row : rows) {
        if (!edges.insert({std::min(row.from, row.to), std::max(row.from, row.to)}).second)
            throw NetworkError("duplicate branch " + std::to_string(row.from) + "-" +
                               std::to_string(row.to));
        const WireSpec w = resolve_wire(row.wire, wires);
        Branch br;
        br.from = row.from;
        br.to = row.to;
        br.wire = row.wire;
        br.length_m = row.length_m;
        const double km = row.length_m / 1000.0;
        br.r_pu = w.effective_r_ohm_per_km() * km / net.z_base_ohm();
        br.x_pu = (w.x_ohm_per_km / w.parallel) * km / net.z_base_ohm();
        br.i_max_pu = w.effective_ampacity_a() / net.i_base_a();
        net.branches.push_back(br);
        max_bus = std::max({max_bus, row.from, row.to});
    }

    net.buses.resize(max_bus);
    for (int j = 1; j <= max_bus; ++j) net.buses[j - 1] = Bus{j, j == 1};
    net.build_topology();
    return net;
}

std::vector<BranchRow> parse_branch_table(const std::string& csv_text) {
    auto t = csv::parse_string(csv_text);
    const int c_f = t.column("from"), c_t = t.column("to"), c_w = t.column("wire"),
              c_l = t.column("length_m");
    if (c_f < 0 || c_t < 0 || c_w < 0 || c_l < 0)
        throw NetworkError("branch table header must be from,to,wire,length_m");
    std::vector<BranchRow> rows;
    for (const auto& row : t.rows) {
        BranchRow r;
        r.from = static_cast<int>(csv::to_long(row[c_f], "branch table"));
        r.to = static_cast<int>(csv::to_long(row[c_t], "branch table"));
        r.wire = row[c_w];
        r.length_m = csv::to_double(row[c_l], "branch table");
        rows.push_back(r);
    }
    return rows;
}

std::vector<BranchRow> parse_branch_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NetworkError("cannot open branch table: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_branch_table(buf.str());
}

const std::string& builtin_wire_csv() {
    // Copper, 75 degC ampacity column; DC resistance at 75 degC converted to
    // ohm/km. Reactance values are typical for spaced LV conductors and are
    // carried for completeness only.
    static const std::string table =
        "name,r_ohm_per_km,x_ohm_per_km,ampacity_a,parallel\n"
        "AWG10,3.9698,0.2296,35,1\n"
        "AWG8,2.5066,0.2187,50,1\n"
        "AWG6,1.6109,0.2083,65,1\n"
        "AWG4,1.0105,0.1985,85,1\n"
        "AWG3,0.8038,0.1936,100,1\n"
        "AWG2,0.6365,0.1887,115,1\n"
        "AWG1,0.5052,0.1838,130,1\n"
        "AWG1/0,0.4003,0.1790,150,1\n"
        "AWG2/0,0.3173,0.1742,175,1\n"
        "AWG3/0,0.2513,0.1694,200,1\n"
        "AWG4/0,0.1995,0.1646,230,1\n"
        "AWG250,0.1690,0.1615,255,1\n"
        "AWG300,0.1407,0.1583,285,1\n"
        "AWG350,0.1204,0.1558,310,1\n"
        "AWG400,0.1056,0.1536,335,1\n"
        "AWG500,0.0843,0.1500,380,1\n"
        "AWG600,0.0702,0.1472,420,1\n"
        "AWG700,0.0602,0.1447,460,1\n"
        "AWG750,0.0561,0.1436,475,1\n";
    return table;
}

}  // namespace mgems
