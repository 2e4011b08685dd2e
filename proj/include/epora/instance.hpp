#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace epora {

struct SupplyAgent {
    std::string id;
    long long capacity = 0;
};

struct DemandType {
    std::string id;
    double rate = 0.0;  // Poisson arrival rate over the unit horizon
};

// Protected group: a set of demand types with a target serving share
// (fraction of all service that should reach the group).
struct Group {
    std::string id;
    std::vector<std::string> members;
    double target = 0.0;
};

struct Instance {
    std::vector<SupplyAgent> supply;
    std::vector<DemandType> demand;
    // (supply id, demand id) pairs
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<Group> groups;
};

struct Violation {
    std::string code;     // stable machine-readable identifier
    std::string subject;  // offending id / edge, empty when global
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Instance& inst);

// Numeric view of a structurally valid instance: id -> index maps,
// adjacency in deterministic (input) order, group membership by index and
// the derived quantities used by the benchmark and the metrics.
struct InstanceIndex {
    std::unordered_map<std::string, int> supply_id;
    std::unordered_map<std::string, int> demand_id;
    std::vector<long long> capacity;                  // by supply index
    std::vector<double> rate;                         // by demand index
    std::vector<std::pair<int, int>> edges;           // (supply, demand)
    std::vector<std::vector<int>> demand_neighbors;   // supply idx per demand
    std::vector<std::vector<int>> demand_edge_ids;    // edge idx per demand
    std::vector<std::vector<int>> supply_neighbors;   // demand idx per supply
    std::vector<std::vector<int>> group_members;      // demand idx per group
    std::vector<double> group_target;                 // mu_g
    std::vector<double> group_rate;                   // lambda_g

    double lambda_total = 0.0;
    long long capacity_total = 0;
    long long capacity_min = 0;

    // Disproportionality of group g: (lambda_g / lambda) / mu_g.
    std::vector<double> group_kappa;
    double kappa_min = 0.0;

    // Set when every group is a singleton covering each demand type exactly
    // once; then mu_j/kappa_j are the per-type views of the group columns.
    bool homogeneous = false;
    std::vector<double> mu_j;      // by demand index
    std::vector<double> kappa_j;   // by demand index
    double mu_sum = 0.0;
};

// Throws EporaError{"invalid_instance"} when ids do not resolve; run
// validate() first for a full report.
InstanceIndex build_index(const Instance& inst);

// Rescales every demand rate multiplicatively so that total arrivals equal
// capacity_total * rho.  Group targets and disproportionality are untouched.
// Throws EporaError{"rho_below_one"} for rho < 1.
Instance apply_scarcity(const Instance& inst, double rho);

// Drops supply agents with capacity < floor together with their edges.
// Demand types and groups stay.  Throws EporaError{"no_supply_remaining"}
// when nothing survives.  Idempotent at the same floor.
Instance filter_min_capacity(const Instance& inst, long long floor);

}  // namespace epora
