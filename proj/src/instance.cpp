#include "epora/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "epora/error.hpp"

namespace epora {

namespace {

// Homogeneous shape: every group a singleton and every demand type covered
// exactly once.  Only then does the per-type target floor make sense.
bool homogeneous_shape(const Instance& inst,
                       const std::unordered_map<std::string, int>& demand_id) {
    if (inst.groups.size() != inst.demand.size()) return false;
    std::vector<int> seen(inst.demand.size(), 0);
    for (const auto& g : inst.groups) {
        if (g.members.size() != 1) return false;
        auto it = demand_id.find(g.members[0]);
        if (it == demand_id.end()) return false;
        if (seen[it->second]++) return false;
    }
    return true;
}

}  // namespace

ValidationReport validate(const Instance& inst) {
    ValidationReport rep;
    auto flag = [&rep](std::string code, std::string subject, std::string msg) {
        rep.violations.push_back({std::move(code), std::move(subject), std::move(msg)});
    };

    if (inst.supply.empty()) flag("empty_supply", "", "instance has no supply agents");
    if (inst.demand.empty()) flag("empty_demand", "", "instance has no demand types");

    std::unordered_map<std::string, int> sid, did;
    for (int i = 0; i < int(inst.supply.size()); ++i) {
        const auto& s = inst.supply[i];
        if (!sid.emplace(s.id, i).second)
            flag("duplicate_supply_id", s.id, "supply id appears more than once");
        if (s.capacity < 1)
            flag("capacity_below_one", s.id, "capacity must be a positive integer");
    }
    for (int j = 0; j < int(inst.demand.size()); ++j) {
        const auto& d = inst.demand[j];
        if (!did.emplace(d.id, j).second)
            flag("duplicate_demand_id", d.id, "demand id appears more than once");
        if (!(d.rate > 0.0) || !std::isfinite(d.rate))
            flag("nonpositive_rate", d.id, "arrival rate must be finite and > 0");
    }

    std::set<std::pair<std::string, std::string>> edge_seen;
    for (const auto& e : inst.edges) {
        std::string label = e.first + "-" + e.second;
        if (!sid.count(e.first))
            flag("edge_unknown_supply", label, "edge references unknown supply id");
        if (!did.count(e.second))
            flag("edge_unknown_demand", label, "edge references unknown demand id");
        if (!edge_seen.insert(e).second)
            flag("duplicate_edge", label, "edge appears more than once");
    }

    std::set<std::string> gid;
    for (const auto& g : inst.groups) {
        if (!gid.insert(g.id).second)
            flag("duplicate_group_id", g.id, "group id appears more than once");
        if (g.members.empty())
            flag("empty_group", g.id, "group has no members");
        std::set<std::string> mem;
        for (const auto& m : g.members) {
            if (!did.count(m))
                flag("group_unknown_member", g.id, "group references unknown demand id " + m);
            if (!mem.insert(m).second)
                flag("duplicate_group_member", g.id, "member " + m + " listed twice");
        }
        if (!(g.target > 0.0) || !(g.target < 1.0) || !std::isfinite(g.target))
            flag("target_out_of_range", g.id, "group target must lie in (0, 1)");
    }

    // Per-type floors are only satisfiable when the targets sum to at least
    // one arrival share; enforced for homogeneous-shaped instances.
    if (rep.ok() && homogeneous_shape(inst, did)) {
        double mu_sum = 0.0;
        for (const auto& g : inst.groups) mu_sum += g.target;
        if (mu_sum < 1.0 - 1e-9)
            flag("mu_sum_below_one", "",
                 "singleton group targets sum to less than one");
    }
    return rep;
}

InstanceIndex build_index(const Instance& inst) {
    InstanceIndex ix;
    for (int i = 0; i < int(inst.supply.size()); ++i) {
        if (!ix.supply_id.emplace(inst.supply[i].id, i).second)
            throw EporaError("invalid_instance", "duplicate supply id " + inst.supply[i].id);
        ix.capacity.push_back(inst.supply[i].capacity);
    }
    for (int j = 0; j < int(inst.demand.size()); ++j) {
        if (!ix.demand_id.emplace(inst.demand[j].id, j).second)
            throw EporaError("invalid_instance", "duplicate demand id " + inst.demand[j].id);
        ix.rate.push_back(inst.demand[j].rate);
        ix.lambda_total += inst.demand[j].rate;
    }
    ix.demand_neighbors.resize(inst.demand.size());
    ix.demand_edge_ids.resize(inst.demand.size());
    ix.supply_neighbors.resize(inst.supply.size());
    for (const auto& e : inst.edges) {
        auto si = ix.supply_id.find(e.first);
        auto dj = ix.demand_id.find(e.second);
        if (si == ix.supply_id.end() || dj == ix.demand_id.end())
            throw EporaError("invalid_instance",
                             "edge " + e.first + "-" + e.second + " has unknown endpoint");
        int eid = int(ix.edges.size());
        ix.edges.emplace_back(si->second, dj->second);
        ix.demand_neighbors[dj->second].push_back(si->second);
        ix.demand_edge_ids[dj->second].push_back(eid);
        ix.supply_neighbors[si->second].push_back(dj->second);
    }
    ix.capacity_total = 0;
    ix.capacity_min = inst.supply.empty() ? 0 : inst.supply[0].capacity;
    for (long long b : ix.capacity) {
        ix.capacity_total += b;
        ix.capacity_min = std::min(ix.capacity_min, b);
    }
    for (const auto& g : inst.groups) {
        std::vector<int> members;
        double lam_g = 0.0;
        for (const auto& m : g.members) {
            auto it = ix.demand_id.find(m);
            if (it == ix.demand_id.end())
                throw EporaError("invalid_instance", "group member " + m + " unknown");
            members.push_back(it->second);
            lam_g += ix.rate[it->second];
        }
        ix.group_members.push_back(std::move(members));
        ix.group_target.push_back(g.target);
        ix.group_rate.push_back(lam_g);
    }
    ix.kappa_min = 0.0;
    for (size_t g = 0; g < ix.group_members.size(); ++g) {
        double kappa = (ix.group_rate[g] / ix.lambda_total) / ix.group_target[g];
        ix.group_kappa.push_back(kappa);
        if (g == 0 || kappa < ix.kappa_min) ix.kappa_min = kappa;
    }

    ix.homogeneous = inst.groups.size() == inst.demand.size() && !inst.demand.empty();
    if (ix.homogeneous) {
        ix.mu_j.assign(inst.demand.size(), -1.0);
        ix.kappa_j.assign(inst.demand.size(), 0.0);
        for (size_t g = 0; g < ix.group_members.size(); ++g) {
            if (ix.group_members[g].size() != 1 || ix.mu_j[ix.group_members[g][0]] >= 0.0) {
                ix.homogeneous = false;
                break;
            }
            int j = ix.group_members[g][0];
            ix.mu_j[j] = ix.group_target[g];
            ix.kappa_j[j] = ix.group_kappa[g];
        }
    }
    if (ix.homogeneous) {
        ix.mu_sum = 0.0;
        for (double m : ix.mu_j) ix.mu_sum += m;
    } else {
        ix.mu_j.clear();
        ix.kappa_j.clear();
    }
    return ix;
}

Instance apply_scarcity(const Instance& inst, double rho) {
    if (!(rho >= 1.0))
        throw EporaError("rho_below_one", "scarcity level must be >= 1");
    long long cap_total = 0;
    for (const auto& s : inst.supply) cap_total += s.capacity;
    double lam = 0.0;
    for (const auto& d : inst.demand) lam += d.rate;
    if (!(lam > 0.0))
        throw EporaError("invalid_instance", "total arrival rate must be positive");
    double scale = double(cap_total) * rho / lam;
    Instance out = inst;
    for (auto& d : out.demand) d.rate *= scale;
    return out;
}

Instance filter_min_capacity(const Instance& inst, long long floor) {
    Instance out;
    std::set<std::string> kept;
    for (const auto& s : inst.supply)
        if (s.capacity >= floor) {
            out.supply.push_back(s);
            kept.insert(s.id);
        }
    if (out.supply.empty())
        throw EporaError("no_supply_remaining",
                         "capacity floor removes every supply agent");
    out.demand = inst.demand;
    for (const auto& e : inst.edges)
        if (kept.count(e.first)) out.edges.push_back(e);
    out.groups = inst.groups;
    return out;
}

}  // namespace epora
