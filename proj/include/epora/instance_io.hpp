#pragma once

#include <string>

#include "epora/instance.hpp"

namespace epora {

// Canonical on-disk format: one self-describing JSON document
//   { "supply": [{"id","capacity"}], "demand": [{"id","rate"}],
//     "edges": [["supply_id","demand_id"]], "groups": [{"id","members","target"}] }
// Save/load round-trips exactly (rates written with full precision).
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

// Same schema from/to an in-memory string (used by the LP cache and tests).
Instance parse_instance_json(const std::string& text);
std::string instance_to_json(const Instance& inst);

// CSV ingestion adapter.  Three files:
//   supply.csv:    id,county,product,capacity
//   demand.csv:    id,county,race,rate
//   adjacency.csv: county_a,county_b
// An edge is emitted for every (supply, demand) pair whose counties are equal
// or adjacent.  One group per distinct race; group targets must be supplied
// separately (demand.csv may carry an optional group_target column, constant
// within a race).
Instance ingest_csv(const std::string& supply_csv,
                    const std::string& demand_csv,
                    const std::string& adjacency_csv);

}  // namespace epora
