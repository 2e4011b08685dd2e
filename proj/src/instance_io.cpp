#include "epora/instance_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "epora/error.hpp"
#include "json.hpp"

namespace epora {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw EporaError("parse_error", path.empty() ? what : path + ": " + what);
}

json instance_to_json_obj(const Instance& inst) {
    json doc;
    doc["supply"] = json::array();
    for (const auto& s : inst.supply)
        doc["supply"].push_back({{"id", s.id}, {"capacity", s.capacity}});
    doc["demand"] = json::array();
    for (const auto& d : inst.demand)
        doc["demand"].push_back({{"id", d.id}, {"rate", d.rate}});
    doc["edges"] = json::array();
    for (const auto& e : inst.edges)
        doc["edges"].push_back({e.first, e.second});
    doc["groups"] = json::array();
    for (const auto& g : inst.groups)
        doc["groups"].push_back(
            {{"id", g.id}, {"members", g.members}, {"target", g.target}});
    return doc;
}

Instance instance_from_json_obj(const json& doc, const std::string& path) {
    if (!doc.is_object()) parse_fail(path, "top level is not an object");
    for (const char* key : {"supply", "demand", "edges", "groups"}) {
        if (!doc.contains(key))
            parse_fail(path, std::string("missing field '") + key + "'");
        if (!doc[key].is_array())
            parse_fail(path, std::string("field '") + key + "' is not an array");
    }

    Instance inst;
    for (const auto& s : doc["supply"]) {
        if (!s.contains("id") || !s.contains("capacity"))
            parse_fail(path, "supply entry missing 'id' or 'capacity'");
        inst.supply.push_back(
            {s["id"].get<std::string>(), s["capacity"].get<long long>()});
    }
    for (const auto& d : doc["demand"]) {
        if (!d.contains("id") || !d.contains("rate"))
            parse_fail(path, "demand entry missing 'id' or 'rate'");
        inst.demand.push_back(
            {d["id"].get<std::string>(), d["rate"].get<double>()});
    }
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2)
            parse_fail(path, "edge entry is not a [supply_id, demand_id] pair");
        inst.edges.emplace_back(e[0].get<std::string>(),
                                e[1].get<std::string>());
    }
    for (const auto& g : doc["groups"]) {
        if (!g.contains("id") || !g.contains("members") || !g.contains("target"))
            parse_fail(path, "group entry missing 'id', 'members' or 'target'");
        Group grp;
        grp.id = g["id"].get<std::string>();
        for (const auto& m : g["members"])
            grp.members.push_back(m.get<std::string>());
        grp.target = g["target"].get<double>();
        inst.groups.push_back(std::move(grp));
    }
    return inst;
}

// Minimal CSV reader: no quoting (ids here never contain commas), blank
// lines skipped, first line is the header.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail(path, "cannot open file");
    Csv csv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (csv.header.empty()) {
            csv.header = std::move(fields);
        } else {
            if (fields.size() != csv.header.size())
                parse_fail(path, "line " + std::to_string(lineno) +
                                     ": expected " +
                                     std::to_string(csv.header.size()) +
                                     " fields, got " +
                                     std::to_string(fields.size()));
            csv.rows.push_back(std::move(fields));
        }
    }
    if (csv.header.empty()) parse_fail(path, "missing header row");
    return csv;
}

int column(const Csv& csv, const std::string& name, const std::string& path,
           bool required = true) {
    for (size_t i = 0; i < csv.header.size(); ++i)
        if (csv.header[i] == name) return static_cast<int>(i);
    if (required) parse_fail(path, "missing column '" + name + "'");
    return -1;
}

double parse_number(const std::string& text, const std::string& path,
                    const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        parse_fail(path, "bad numeric value '" + text + "' in " + what);
    }
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
    // nlohmann's default double output already round-trips; dump with
    // 2-space indent for human-diffable fixtures.
    return instance_to_json_obj(inst).dump(2) + "\n";
}

Instance parse_instance_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        parse_fail("", e.what());
    }
    return instance_from_json_obj(doc, "");
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail(path, "cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        parse_fail(path, e.what());
    }
    return instance_from_json_obj(doc, path);
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw EporaError("io_error", path + ": cannot open for writing");
    out << instance_to_json(inst);
    if (!out) throw EporaError("io_error", path + ": write failed");
}

Instance ingest_csv(const std::string& supply_csv,
                    const std::string& demand_csv,
                    const std::string& adjacency_csv) {
    Csv sup = read_csv(supply_csv);
    Csv dem = read_csv(demand_csv);
    Csv adj = read_csv(adjacency_csv);

    const int s_id = column(sup, "id", supply_csv);
    const int s_county = column(sup, "county", supply_csv);
    const int s_cap = column(sup, "capacity", supply_csv);
    const int d_id = column(dem, "id", demand_csv);
    const int d_county = column(dem, "county", demand_csv);
    const int d_race = column(dem, "race", demand_csv);
    const int d_rate = column(dem, "rate", demand_csv);
    const int d_target = column(dem, "group_target", demand_csv, false);
    const int a_a = column(adj, "county_a", adjacency_csv);
    const int a_b = column(adj, "county_b", adjacency_csv);

    // Symmetric closure of the adjacency list; a county is adjacent to itself.
    std::set<std::pair<std::string, std::string>> adjacent;
    for (const auto& row : adj.rows) {
        adjacent.insert({row[a_a], row[a_b]});
        adjacent.insert({row[a_b], row[a_a]});
    }
    auto reachable = [&](const std::string& a, const std::string& b) {
        return a == b || adjacent.count({a, b}) > 0;
    };

    Instance inst;
    std::vector<std::string> supply_county;
    for (const auto& row : sup.rows) {
        double cap = parse_number(row[s_cap], supply_csv,
                                  "capacity of '" + row[s_id] + "'");
        inst.supply.push_back({row[s_id], static_cast<long long>(cap)});
        supply_county.push_back(row[s_county]);
    }

    // Insertion-ordered race -> (members, target) accumulation.
    std::vector<std::string> race_order;
    std::map<std::string, Group> race_groups;
    for (const auto& row : dem.rows) {
        double rate = parse_number(row[d_rate], demand_csv,
                                   "rate of '" + row[d_id] + "'");
        inst.demand.push_back({row[d_id], rate});
        const std::string& race = row[d_race];
        auto it = race_groups.find(race);
        if (it == race_groups.end()) {
            race_order.push_back(race);
            it = race_groups.emplace(race, Group{race, {}, 0.0}).first;
        }
        it->second.members.push_back(row[d_id]);
        if (d_target >= 0)
            it->second.target = parse_number(row[d_target], demand_csv,
                                             "group_target of '" + row[d_id] +
                                                 "'");
    }

    for (size_t si = 0; si < inst.supply.size(); ++si)
        for (size_t di = 0; di < inst.demand.size(); ++di)
            if (reachable(supply_county[si], dem.rows[di][d_county]))
                inst.edges.emplace_back(inst.supply[si].id, inst.demand[di].id);

    for (const auto& race : race_order)
        inst.groups.push_back(race_groups.at(race));
    return inst;
}

}  // namespace epora
