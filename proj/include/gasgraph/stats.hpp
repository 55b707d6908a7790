#pragma once

#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "gasgraph/dataset.hpp"
#include "gasgraph/temporal.hpp"

namespace gasgraph {

struct StatsKey {
    Carrier carrier;
    SegmentStatus status;
    SegmentCategory category;

    friend bool operator<(const StatsKey& a, const StatsKey& b) {
        return std::tie(a.carrier, a.status, a.category) <
               std::tie(b.carrier, b.status, b.category);
    }
};

struct StatsBucket {
    std::size_t count = 0;
    double length_km = 0.0;
};

struct StatsReport {
    std::optional<int> year;  // set when computed over a timestep view
    std::map<StatsKey, StatsBucket> segments;
    std::size_t node_count = 0;
    std::size_t short_pipe_count = 0;
    std::size_t demand_point_count = 0;
    std::map<NodeKind, std::size_t> facility_counts;

    std::size_t segment_count() const {
        std::size_t total = 0;
        for (const auto& [_, b] : segments) total += b.count;
        return total;
    }
    double total_length_km() const {
        double total = 0.0;
        for (const auto& [_, b] : segments) total += b.length_km;
        return total;
    }
    StatsBucket by_status(SegmentStatus status) const {
        StatsBucket out;
        for (const auto& [key, b] : segments)
            if (key.status == status) {
                out.count += b.count;
                out.length_km += b.length_km;
            }
        return out;
    }
    StatsBucket by_carrier(Carrier carrier) const {
        StatsBucket out;
        for (const auto& [key, b] : segments)
            if (key.carrier == carrier) {
                out.count += b.count;
                out.length_km += b.length_km;
            }
        return out;
    }
};

// Whole-dataset totals, keyed by the stored carrier/status/category labels.
inline StatsReport compute_stats(const NetworkDataset& ds) {
    StatsReport r;
    for (const PipelineSegment& s : ds.segments) {
        StatsBucket& b = r.segments[StatsKey{s.carrier, s.status, s.category}];
        ++b.count;
        b.length_km += geodesic_length_km(s.geometry);
    }
    r.node_count = ds.nodes.size();
    r.short_pipe_count = ds.short_pipes.size();
    r.demand_point_count = ds.demand_points.size();
    for (const FacilityPoint& f : ds.facilities) ++r.facility_counts[f.kind];
    return r;
}

// Totals over the active network at one year, keyed by effective carrier.
inline StatsReport compute_stats_at(const NetworkDataset& ds, int year) {
    const TimestepView view = topology_at(ds, year);
    StatsReport r;
    r.year = year;
    for (const PipelineSegment& s : ds.segments) {
        auto it = view.active_segments.find(s.id);
        if (it == view.active_segments.end()) continue;
        StatsBucket& b = r.segments[StatsKey{it->second, s.status, s.category}];
        ++b.count;
        b.length_km += geodesic_length_km(s.geometry);
    }
    r.node_count = ds.nodes.size();
    r.short_pipe_count = view.active_short_pipes.size();
    r.demand_point_count = ds.demand_points.size();
    for (const FacilityPoint& f : ds.facilities) ++r.facility_counts[f.kind];
    return r;
}

inline std::string format_stats(const StatsReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    if (r.year)
        out << "network statistics at year " << *r.year << '\n';
    else
        out << "network statistics\n";
    out << "  segments: " << r.segment_count() << " (" << r.total_length_km()
        << " km)\n";
    for (const auto& [key, b] : r.segments)
        out << "    " << to_string(key.carrier) << ' ' << to_string(key.status)
            << ' ' << to_string(key.category) << ": " << b.count << " ("
            << b.length_km << " km)\n";
    out << "  nodes: " << r.node_count << '\n';
    out << "  short pipes: " << r.short_pipe_count
        << (r.year ? " active\n" : "\n");
    out << "  demand points: " << r.demand_point_count << '\n';
    if (!r.facility_counts.empty()) {
        out << "  facilities:\n";
        for (const auto& [kind, count] : r.facility_counts)
            out << "    " << to_string(kind) << ": " << count << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json stats_to_json(const StatsReport& r) {
    nlohmann::ordered_json doc;
    if (r.year) doc["year"] = *r.year;
    nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
    for (const auto& [key, b] : r.segments) {
        nlohmann::ordered_json jb;
        jb["carrier"] = to_string(key.carrier);
        jb["status"] = to_string(key.status);
        jb["category"] = to_string(key.category);
        jb["count"] = b.count;
        jb["length_km"] = b.length_km;
        buckets.push_back(std::move(jb));
    }
    doc["segments"] = std::move(buckets);
    doc["segment_count"] = r.segment_count();
    doc["total_length_km"] = r.total_length_km();
    doc["node_count"] = r.node_count;
    doc["short_pipe_count"] = r.short_pipe_count;
    doc["demand_point_count"] = r.demand_point_count;
    nlohmann::ordered_json fac;
    for (const auto& [kind, count] : r.facility_counts)
        fac[std::string(to_string(kind))] = count;
    doc["facilities"] = std::move(fac);
    return doc;
}

}  // namespace gasgraph
