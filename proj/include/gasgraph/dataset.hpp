#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gasgraph/errors.hpp"
#include "gasgraph/geo.hpp"

namespace gasgraph {

enum class Carrier { natural_gas, hydrogen, transitional };

enum class NodeKind {
    junction,
    border_point,
    storage,
    compressor,
    demand,
    electrolyzer,
    biogas_plant,
    power_plant,
};

enum class SegmentCategory { transmission, distribution_l1, distribution_l2 };

enum class SegmentStatus { existing, repurposed, new_build };

// Provenance of a segment's technical attributes. "manual" values are never
// overwritten by automated steps.
enum class AttrSource { matched, assumed, manual, unset };

inline std::string_view to_string(Carrier c) {
    switch (c) {
        case Carrier::natural_gas: return "natural_gas";
        case Carrier::hydrogen: return "hydrogen";
        case Carrier::transitional: return "transitional";
    }
    return "natural_gas";
}

inline std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::junction: return "junction";
        case NodeKind::border_point: return "border_point";
        case NodeKind::storage: return "storage";
        case NodeKind::compressor: return "compressor";
        case NodeKind::demand: return "demand";
        case NodeKind::electrolyzer: return "electrolyzer";
        case NodeKind::biogas_plant: return "biogas_plant";
        case NodeKind::power_plant: return "power_plant";
    }
    return "junction";
}

inline std::string_view to_string(SegmentCategory c) {
    switch (c) {
        case SegmentCategory::transmission: return "transmission";
        case SegmentCategory::distribution_l1: return "distribution_l1";
        case SegmentCategory::distribution_l2: return "distribution_l2";
    }
    return "transmission";
}

inline std::string_view to_string(SegmentStatus s) {
    switch (s) {
        case SegmentStatus::existing: return "existing";
        case SegmentStatus::repurposed: return "repurposed";
        case SegmentStatus::new_build: return "new_build";
    }
    return "existing";
}

inline std::string_view to_string(AttrSource s) {
    switch (s) {
        case AttrSource::matched: return "matched";
        case AttrSource::assumed: return "assumed";
        case AttrSource::manual: return "manual";
        case AttrSource::unset: return "unset";
    }
    return "unset";
}

inline Carrier carrier_from_string(std::string_view s, const std::string& ctx) {
    if (s == "natural_gas") return Carrier::natural_gas;
    if (s == "hydrogen") return Carrier::hydrogen;
    if (s == "transitional") return Carrier::transitional;
    throw SchemaError(ctx + ": unknown carrier '" + std::string(s) + "'");
}

inline NodeKind node_kind_from_string(std::string_view s, const std::string& ctx) {
    if (s == "junction") return NodeKind::junction;
    if (s == "border_point") return NodeKind::border_point;
    if (s == "storage") return NodeKind::storage;
    if (s == "compressor") return NodeKind::compressor;
    if (s == "demand") return NodeKind::demand;
    if (s == "electrolyzer") return NodeKind::electrolyzer;
    if (s == "biogas_plant") return NodeKind::biogas_plant;
    if (s == "power_plant") return NodeKind::power_plant;
    throw SchemaError(ctx + ": unknown kind '" + std::string(s) + "'");
}

inline SegmentCategory category_from_string(std::string_view s,
                                            const std::string& ctx) {
    if (s == "transmission") return SegmentCategory::transmission;
    if (s == "distribution_l1") return SegmentCategory::distribution_l1;
    if (s == "distribution_l2") return SegmentCategory::distribution_l2;
    throw SchemaError(ctx + ": unknown category '" + std::string(s) + "'");
}

inline SegmentStatus status_from_string(std::string_view s,
                                        const std::string& ctx) {
    if (s == "existing") return SegmentStatus::existing;
    if (s == "repurposed") return SegmentStatus::repurposed;
    if (s == "new_build") return SegmentStatus::new_build;
    throw SchemaError(ctx + ": unknown status '" + std::string(s) + "'");
}

inline AttrSource attr_source_from_string(std::string_view s,
                                          const std::string& ctx) {
    if (s == "matched") return AttrSource::matched;
    if (s == "assumed") return AttrSource::assumed;
    if (s == "manual") return AttrSource::manual;
    if (s == "unset") return AttrSource::unset;
    throw SchemaError(ctx + ": unknown attr_source '" + std::string(s) + "'");
}

struct NetworkNode {
    std::string id;
    GeoPoint location;
    NodeKind kind = NodeKind::junction;
    Carrier carrier = Carrier::natural_gas;
    std::optional<std::string> nuts3;
};

struct PipelineSegment {
    std::string id;
    Polyline geometry;
    std::string from_node;  // empty until bound by snapping
    std::string to_node;
    Carrier carrier = Carrier::natural_gas;
    SegmentCategory category = SegmentCategory::transmission;
    SegmentStatus status = SegmentStatus::existing;
    std::optional<double> diameter_min_mm;
    std::optional<double> diameter_max_mm;
    std::optional<double> pressure_min_bar;
    std::optional<double> pressure_max_bar;
    std::optional<int> repurpose_year;   // status == repurposed only
    std::optional<int> commission_year;  // status == new_build only
    double length_km = 0.0;              // derived from geometry
    std::optional<std::string> name;
    AttrSource attr_source = AttrSource::unset;
};

// Lossless, non-limiting connector. Activation windows implement the
// time-dependent topology changes; there are deliberately no capacity or
// length attributes.
struct ShortPipe {
    std::string id;
    std::string from_node;
    std::string to_node;
    std::optional<int> activate_year;    // active from this year on
    std::optional<int> deactivate_year;  // inactive from this year on
};

struct FacilityPoint {
    std::string id;
    GeoPoint location;
    NodeKind kind = NodeKind::storage;  // never junction
    Carrier carrier = Carrier::natural_gas;
    std::optional<std::string> attached_node;
};

struct DemandPoint {
    std::string id;
    GeoPoint location;  // region centroid
    std::string nuts3;
    Carrier carrier = Carrier::natural_gas;
    double annual_demand = 0.0;  // unit declared in dataset metadata
};

struct DatasetMetadata {
    std::string crs = "EPSG:4326";
    std::string demand_unit = "GWh/a";
    std::vector<int> horizon;            // e.g. 2027, 2030, 2035, 2040
    std::vector<std::string> exceptions; // region codes or node ids exempt
                                         // from supply validation
};

struct NetworkDataset {
    std::vector<NetworkNode> nodes;
    std::vector<PipelineSegment> segments;
    std::vector<ShortPipe> short_pipes;
    std::vector<FacilityPoint> facilities;
    std::vector<DemandPoint> demand_points;
    DatasetMetadata metadata;
};

template <typename Record>
std::unordered_map<std::string, std::size_t> index_by_id(
    const std::vector<Record>& records) {
    std::unordered_map<std::string, std::size_t> idx;
    idx.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) idx.emplace(records[i].id, i);
    return idx;
}

inline const NetworkNode* find_node(const NetworkDataset& ds,
                                    const std::string& id) {
    for (const NetworkNode& n : ds.nodes)
        if (n.id == id) return &n;
    return nullptr;
}

inline bool crs_is_wgs84(const std::string& crs) {
    return crs == "EPSG:4326" || crs == "WGS84" || crs == "OGC:CRS84" ||
           crs == "urn:ogc:def:crs:OGC:1.3:CRS84";
}

// Fills length_km for segments that do not carry one yet (length 0 counts as
// unset; a valid geometry always has positive length).
inline void populate_segment_lengths(NetworkDataset& ds) {
    for (PipelineSegment& s : ds.segments)
        if (s.length_km <= 0.0) s.length_km = geodesic_length_km(s.geometry);
}

namespace detail {

template <typename Record>
void check_unique_ids(const std::vector<Record>& records, const char* layer) {
    std::set<std::string_view> seen;
    for (const Record& r : records) {
        if (r.id.empty())
            throw SchemaError(std::string(layer) + " feature with empty id");
        if (!seen.insert(r.id).second)
            throw SchemaError("duplicate " + std::string(layer) + " id '" +
                              r.id + "'");
    }
}

}  // namespace detail

// Checks every structural invariant of the dataset. Throws SchemaError with
// the offending feature id and field on the first violation.
inline void validate_dataset(const NetworkDataset& ds) {
    if (!crs_is_wgs84(ds.metadata.crs))
        throw SchemaError("metadata.crs '" + ds.metadata.crs +
                          "' is not geographic WGS84; reprojection is not supported");

    detail::check_unique_ids(ds.nodes, "node");
    detail::check_unique_ids(ds.segments, "segment");
    detail::check_unique_ids(ds.short_pipes, "short_pipe");
    detail::check_unique_ids(ds.facilities, "facility");
    detail::check_unique_ids(ds.demand_points, "demand");

    std::set<std::string_view> node_ids;
    for (const NetworkNode& n : ds.nodes) {
        const std::string ctx = "node '" + n.id + "'";
        if (!point_is_finite(n.location) || !point_in_bounds(n.location))
            throw SchemaError(ctx + ": location outside WGS84 bounds");
        node_ids.insert(n.id);
    }

    for (const PipelineSegment& s : ds.segments) {
        const std::string ctx = "segment '" + s.id + "'";
        if (const std::string p = polyline_problem(s.geometry); !p.empty())
            throw SchemaError(ctx + ": geometry: " + p);
        if (s.carrier == Carrier::transitional)
            throw SchemaError(ctx + ": carrier: segments cannot be transitional");
        if (s.diameter_min_mm && s.diameter_max_mm &&
            *s.diameter_min_mm > *s.diameter_max_mm)
            throw SchemaError(ctx + ": diameter_min_mm > diameter_max_mm");
        if (s.pressure_min_bar && s.pressure_max_bar &&
            *s.pressure_min_bar > *s.pressure_max_bar)
            throw SchemaError(ctx + ": pressure_min_bar > pressure_max_bar");
        if (s.status == SegmentStatus::repurposed && !s.repurpose_year)
            throw SchemaError(ctx + ": repurpose_year: required for repurposed status");
        if (s.status != SegmentStatus::repurposed && s.repurpose_year)
            throw SchemaError(ctx + ": repurpose_year: only valid for repurposed status");
        if (s.status == SegmentStatus::new_build && !s.commission_year)
            throw SchemaError(ctx + ": commission_year: required for new_build status");
        if (s.status != SegmentStatus::new_build && s.commission_year)
            throw SchemaError(ctx + ": commission_year: only valid for new_build status");
        if (s.status == SegmentStatus::new_build && s.carrier != Carrier::hydrogen)
            throw SchemaError(ctx + ": carrier: new_build segments carry hydrogen");
        if (!s.from_node.empty() && !node_ids.count(s.from_node))
            throw SchemaError(ctx + ": from_node: unresolved reference '" +
                              s.from_node + "'");
        if (!s.to_node.empty() && !node_ids.count(s.to_node))
            throw SchemaError(ctx + ": to_node: unresolved reference '" +
                              s.to_node + "'");
        const double computed = geodesic_length_km(s.geometry);
        if (s.length_km > 0.0 &&
            std::abs(s.length_km - computed) > 0.001 * computed)
            throw SchemaError(ctx + ": length_km: stored " +
                              std::to_string(s.length_km) +
                              " deviates more than 0.1% from geometry length " +
                              std::to_string(computed));
    }

    for (const ShortPipe& sp : ds.short_pipes) {
        const std::string ctx = "short_pipe '" + sp.id + "'";
        if (sp.activate_year && sp.deactivate_year &&
            !(*sp.activate_year < *sp.deactivate_year))
            throw SchemaError(ctx + ": activate_year must precede deactivate_year");
        if (!node_ids.count(sp.from_node))
            throw SchemaError(ctx + ": from_node: unresolved reference '" +
                              sp.from_node + "'");
        if (!node_ids.count(sp.to_node))
            throw SchemaError(ctx + ": to_node: unresolved reference '" +
                              sp.to_node + "'");
    }

    for (const FacilityPoint& f : ds.facilities) {
        const std::string ctx = "facility '" + f.id + "'";
        if (f.kind == NodeKind::junction)
            throw SchemaError(ctx + ": kind: facilities cannot be junctions");
        if (f.carrier == Carrier::transitional)
            throw SchemaError(ctx + ": carrier: facilities cannot be transitional");
        if (!point_is_finite(f.location) || !point_in_bounds(f.location))
            throw SchemaError(ctx + ": location outside WGS84 bounds");
        if (f.attached_node && !node_ids.count(*f.attached_node))
            throw SchemaError(ctx + ": attached_node: unresolved reference '" +
                              *f.attached_node + "'");
    }

    for (const DemandPoint& d : ds.demand_points) {
        const std::string ctx = "demand '" + d.id + "'";
        if (d.nuts3.empty()) throw SchemaError(ctx + ": nuts3: must be non-empty");
        if (d.carrier == Carrier::transitional)
            throw SchemaError(ctx + ": carrier: demand cannot be transitional");
        if (!(d.annual_demand >= 0.0))
            throw SchemaError(ctx + ": annual_demand: must be >= 0");
        if (!point_is_finite(d.location) || !point_in_bounds(d.location))
            throw SchemaError(ctx + ": location outside WGS84 bounds");
    }
}

}  // namespace gasgraph
