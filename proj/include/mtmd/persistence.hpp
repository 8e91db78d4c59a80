#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtmd/merge_tree.hpp"

namespace mtmd {

/// One elder-rule pair, stored as (saddle value, extremum value). The global
/// pair uses the root (global minimum) as its saddle.
struct PersistencePair {
    double saddle_value = 0.0;
    double extremum_value = 0.0;
    int saddle_id = -1;
    int extremum_id = -1;
    bool is_global = false;

    double persistence() const { return extremum_value > saddle_value ? extremum_value - saddle_value
                                                                       : saddle_value - extremum_value; }
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;

    std::size_t size() const { return pairs.size(); }
    const PersistencePair* global_pair() const;
};

PersistenceDiagram elder_rule_diagram(const MergeTree& tree);

/// Bottleneck cost of matching `x` to `y`; std::nullopt stands for the empty
/// node. Throws if both are empty.
double pair_cost(const std::optional<PersistencePair>& x, const std::optional<PersistencePair>& y);

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b);

/// CSV with header "saddle,extremum,is_global".
std::string diagram_to_csv(const PersistenceDiagram& diagram);

} // namespace mtmd
