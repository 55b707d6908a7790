#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/topology.hpp"

namespace gasgraph {

// One row of the distribution parameter table: which category/connectivity
// class receives which (min, max) range. Connectivity is meaningful for
// Level 1 only; an empty optional means "any".
struct DefaultRule {
    SegmentCategory category = SegmentCategory::distribution_l1;
    std::optional<L1Class> connectivity;
    std::string field;  // "diameter_mm" or "pressure_bar"
    double min = 0.0;
    double max = 0.0;
};

// Conservative ranges for Austrian distribution infrastructure: Level 1
// pipes hanging off the transmission grid run 500-600 mm, downstream Level 1
// 300-400 mm, all Level 1 at 20-70 bar; Level 2 runs 100-200 mm at 6-16 bar.
inline std::vector<DefaultRule> builtin_default_table() {
    return {
        {SegmentCategory::distribution_l1, L1Class::transmission_connected,
         "diameter_mm", 500.0, 600.0},
        {SegmentCategory::distribution_l1, L1Class::downstream, "diameter_mm",
         300.0, 400.0},
        {SegmentCategory::distribution_l1, std::nullopt, "pressure_bar", 20.0,
         70.0},
        {SegmentCategory::distribution_l2, std::nullopt, "diameter_mm", 100.0,
         200.0},
        {SegmentCategory::distribution_l2, std::nullopt, "pressure_bar", 6.0,
         16.0},
    };
}

// Table file: five whitespace-separated columns
//   category connectivity field min max
// with connectivity one of transmission_connected/downstream/any and field
// one of diameter_mm/pressure_bar. `#` starts a comment.
inline std::vector<DefaultRule> read_default_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::vector<DefaultRule> rules;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string category, connectivity, field;
        double min_v, max_v;
        if (!(fields >> category)) continue;
        if (!(fields >> connectivity >> field >> min_v >> max_v))
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": expected 'category connectivity field min max'");
        DefaultRule rule;
        rule.category = category_from_string(
            category, path + ":" + std::to_string(lineno));
        if (rule.category == SegmentCategory::transmission)
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": defaults never apply to transmission segments");
        if (connectivity == "transmission_connected")
            rule.connectivity = L1Class::transmission_connected;
        else if (connectivity == "downstream")
            rule.connectivity = L1Class::downstream;
        else if (connectivity != "any")
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": unknown connectivity class '" + connectivity + "'");
        if (field != "diameter_mm" && field != "pressure_bar")
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": unknown field '" + field + "'");
        if (min_v > max_v)
            throw SchemaError(path + ":" + std::to_string(lineno) + ": min > max");
        rule.field = field;
        rule.min = min_v;
        rule.max = max_v;
        rules.push_back(std::move(rule));
    }
    return rules;
}

// Fills still-unset diameter/pressure ranges on distribution segments.
// Precedence is per field: a segment with a matched diameter still receives
// an assumed pressure. Matched and manual values are never overwritten, and
// transmission segments are never touched. Idempotent.
inline NetworkDataset apply_distribution_defaults(
    const NetworkDataset& input, const Graph& graph,
    const std::vector<DefaultRule>& table = builtin_default_table()) {
    NetworkDataset ds = input;
    const std::map<std::string, L1Class> l1 = classify_l1_segments(graph, ds);

    for (PipelineSegment& s : ds.segments) {
        if (s.category == SegmentCategory::transmission) continue;
        bool filled = false;
        for (const DefaultRule& rule : table) {
            if (rule.category != s.category) continue;
            if (rule.connectivity) {
                auto it = l1.find(s.id);
                if (it == l1.end() || it->second != *rule.connectivity) continue;
            }
            auto fill = [&filled](std::optional<double>& lo_slot,
                                  std::optional<double>& hi_slot, double lo,
                                  double hi) {
                // Fill each bound independently but never create an
                // inverted range around a kept value.
                if (!lo_slot && (!hi_slot || lo <= *hi_slot)) {
                    lo_slot = lo;
                    filled = true;
                }
                if (!hi_slot && (!lo_slot || *lo_slot <= hi)) {
                    hi_slot = hi;
                    filled = true;
                }
            };
            if (rule.field == "diameter_mm")
                fill(s.diameter_min_mm, s.diameter_max_mm, rule.min, rule.max);
            else if (rule.field == "pressure_bar")
                fill(s.pressure_min_bar, s.pressure_max_bar, rule.min, rule.max);
        }
        if (filled && s.attr_source == AttrSource::unset)
            s.attr_source = AttrSource::assumed;
    }
    return ds;
}

}  // namespace gasgraph
