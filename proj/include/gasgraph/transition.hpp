#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/geo.hpp"
#include "gasgraph/geojson.hpp"
#include "gasgraph/topology.hpp"

namespace gasgraph {

struct RepurposeEntry {
    std::string segment_id;
    int year = 0;
};

// Declarative schedule of the hydrogen transition: which existing segments
// convert in which year, which hydrogen pipes are newly built, and optional
// hand-wired short pipes that replace the generated ones at their nodes.
struct TransitionPlan {
    std::vector<RepurposeEntry> repurpose;
    std::vector<PipelineSegment> new_builds;
    std::vector<ShortPipe> explicit_short_pipes;
    std::vector<int> horizon;
};

struct RegionDemandSpec {
    std::string nuts3;
    std::vector<GeoPoint> ring;  // closed: first vertex == last
    double annual_demand = 0.0;
    Carrier carrier = Carrier::hydrogen;
};

namespace detail {

inline void check_year_in_horizon(int year, const std::vector<int>& horizon,
                                  const std::string& ctx) {
    if (horizon.empty()) return;
    const auto [lo, hi] = std::minmax_element(horizon.begin(), horizon.end());
    if (year < *lo || year > *hi)
        throw DataError(ctx + ": year " + std::to_string(year) +
                        " outside horizon " + std::to_string(*lo) + ".." +
                        std::to_string(*hi));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plan application

// Moves the listed existing natural gas segments into the repurposed layer.
// Geometry and technical attributes are preserved; only status and the
// repurposing year change.
inline NetworkDataset apply_repurposing(const NetworkDataset& input,
                                        const TransitionPlan& plan) {
    NetworkDataset ds = input;
    auto seg_index = index_by_id(ds.segments);
    std::unordered_set<std::string> seen;
    for (const RepurposeEntry& entry : plan.repurpose) {
        if (!seen.insert(entry.segment_id).second)
            throw DataError("segment '" + entry.segment_id +
                            "' is repurposed twice in the plan");
        auto it = seg_index.find(entry.segment_id);
        if (it == seg_index.end())
            throw DataError("repurpose entry references unknown segment '" +
                            entry.segment_id + "'");
        PipelineSegment& s = ds.segments[it->second];
        if (s.status != SegmentStatus::existing ||
            s.carrier != Carrier::natural_gas)
            throw DataError("segment '" + s.id +
                            "' cannot be repurposed: requires an existing "
                            "natural gas segment, found " +
                            std::string(to_string(s.status)) + "/" +
                            std::string(to_string(s.carrier)));
        detail::check_year_in_horizon(entry.year, plan.horizon,
                                      "repurpose '" + s.id + "'");
        s.status = SegmentStatus::repurposed;
        s.repurpose_year = entry.year;
    }
    return ds;
}

// Appends the plan's newly built hydrogen segments and snaps their endpoints
// into the existing topology (spawning junctions for dangling ends).
inline NetworkDataset add_new_builds(const NetworkDataset& input,
                                     const TransitionPlan& plan,
                                     double snap_tolerance_m = 100.0) {
    NetworkDataset ds = input;
    auto seg_index = index_by_id(ds.segments);
    for (const PipelineSegment& nb : plan.new_builds) {
        if (seg_index.count(nb.id))
            throw DataError("new build id '" + nb.id + "' already exists");
        if (const std::string p = polyline_problem(nb.geometry); !p.empty())
            throw DataError("new build '" + nb.id + "': geometry: " + p);
        if (!nb.commission_year)
            throw DataError("new build '" + nb.id + "' lacks a commission year");
        detail::check_year_in_horizon(*nb.commission_year, plan.horizon,
                                      "new build '" + nb.id + "'");
        PipelineSegment s = nb;
        s.carrier = Carrier::hydrogen;
        s.status = SegmentStatus::new_build;
        s.from_node.clear();
        s.to_node.clear();
        s.length_km = geodesic_length_km(s.geometry);
        seg_index.emplace(s.id, ds.segments.size());
        ds.segments.push_back(std::move(s));
    }
    if (plan.new_builds.empty()) return ds;
    return snap_and_build(ds, snap_tolerance_m).dataset;
}

// ---------------------------------------------------------------------------
// Node splitting

namespace detail {

// Carrier timeline of a segment for conflict detection: NG forever, hydrogen
// from an activation year on, or flipping from NG to hydrogen at the
// repurposing year.
struct CarrierTimeline {
    enum Kind { always_ng, hydrogen_from, flips_at } kind;
    int year;  // activation or flip year; minimal for always-active hydrogen
};

inline CarrierTimeline timeline_of(const PipelineSegment& s) {
    if (s.status == SegmentStatus::repurposed)
        return {CarrierTimeline::flips_at, *s.repurpose_year};
    if (s.status == SegmentStatus::new_build)
        return {CarrierTimeline::hydrogen_from, *s.commission_year};
    if (s.carrier == Carrier::hydrogen)
        return {CarrierTimeline::hydrogen_from, std::numeric_limits<int>::min()};
    return {CarrierTimeline::always_ng, 0};
}

// True when some year sees both segments active with different carriers.
inline bool timelines_conflict(const CarrierTimeline& a, const CarrierTimeline& b) {
    if (a.kind == b.kind)
        return a.kind == CarrierTimeline::flips_at && a.year != b.year;
    const CarrierTimeline& lo = a.kind < b.kind ? a : b;
    const CarrierTimeline& hi = a.kind < b.kind ? b : a;
    if (lo.kind == CarrierTimeline::always_ng) return true;  // vs any hydrogen
    // hydrogen_from vs flips_at: the repurposed pipe is still natural gas
    // while the hydrogen pipe is already active.
    return hi.year > lo.year;
}

}  // namespace detail

// Splits every node whose incident pipelines would ever carry different
// gases at the same time. Pure natural gas pipes rebind to `<id>_NG`, pure
// hydrogen pipes to `<id>_H2`, and each repurposed pipe's endpoint moves to
// its own transitional interface node `<id>_T<k>`. Sub-nodes share the
// original coordinates; the separation is purely topological. Facilities
// attached to a split node follow their own carrier. Idempotent.
inline NetworkDataset split_shared_nodes(const NetworkDataset& input,
                                         const Graph& graph) {
    NetworkDataset ds = input;
    auto seg_index = index_by_id(ds.segments);

    std::unordered_set<std::string> node_ids;
    for (const NetworkNode& n : ds.nodes) node_ids.insert(n.id);

    struct Split {
        bool need_ng = false;
        bool need_h2 = false;
        // repurposed segment id -> interface node id, in (year, id) order
        std::vector<std::pair<std::string, std::string>> interfaces;
    };
    std::map<std::string, Split> splits;

    for (const auto& [node_id, edges] : graph.adjacency) {
        std::vector<const PipelineSegment*> incident;
        for (const IncidentEdge& e : edges) {
            if (e.kind != EdgeKind::segment) continue;
            incident.push_back(&ds.segments[seg_index.at(e.id)]);
        }
        bool conflict = false;
        for (std::size_t i = 0; i < incident.size() && !conflict; ++i)
            for (std::size_t j = i + 1; j < incident.size(); ++j)
                if (detail::timelines_conflict(detail::timeline_of(*incident[i]),
                                               detail::timeline_of(*incident[j]))) {
                    conflict = true;
                    break;
                }
        if (!conflict) continue;

        Split split;
        std::vector<std::pair<int, std::string>> repurposed;  // (year, id)
        for (const PipelineSegment* s : incident) {
            switch (detail::timeline_of(*s).kind) {
                case detail::CarrierTimeline::always_ng: split.need_ng = true; break;
                case detail::CarrierTimeline::hydrogen_from: split.need_h2 = true; break;
                case detail::CarrierTimeline::flips_at:
                    repurposed.emplace_back(*s->repurpose_year, s->id);
                    break;
            }
        }
        for (const FacilityPoint& f : ds.facilities)
            if (f.attached_node == node_id) {
                if (f.carrier == Carrier::natural_gas) split.need_ng = true;
                if (f.carrier == Carrier::hydrogen) split.need_h2 = true;
            }
        std::sort(repurposed.begin(), repurposed.end());
        // Collapse duplicates: a looped segment with both ends here gets one
        // interface node.
        repurposed.erase(std::unique(repurposed.begin(), repurposed.end()),
                         repurposed.end());
        std::size_t k = 0;
        for (const auto& [year, seg_id] : repurposed) {
            (void)year;
            split.interfaces.emplace_back(seg_id,
                                          node_id + "_T" + std::to_string(++k));
        }
        splits.emplace(node_id, std::move(split));
    }

    if (splits.empty()) return ds;

    for (const ShortPipe& sp : ds.short_pipes)
        for (const std::string& end : {sp.from_node, sp.to_node})
            if (splits.count(end))
                throw DataError("short pipe '" + sp.id + "' references node '" +
                                end +
                                "' which is being split; rewire it against "
                                "the carrier-specific sub-nodes");

    auto claim_id = [&node_ids](const std::string& id) {
        if (!node_ids.insert(id).second)
            throw DataError("node id '" + id +
                            "' already exists; cannot create split sub-node");
    };

    std::vector<NetworkNode> new_nodes;
    std::unordered_map<std::string, std::string> ng_sub, h2_sub;
    std::unordered_map<std::string, std::string> interface_of;  // segment -> node
    std::unordered_set<std::string> split_interface_segments;

    for (auto& [node_id, split] : splits) {
        const NetworkNode* original = find_node(ds, node_id);
        if (!original) continue;
        if (split.need_ng) {
            NetworkNode n = *original;
            n.id = node_id + "_NG";
            n.carrier = Carrier::natural_gas;
            claim_id(n.id);
            ng_sub.emplace(node_id, n.id);
            new_nodes.push_back(std::move(n));
        }
        if (split.need_h2) {
            NetworkNode n = *original;
            n.id = node_id + "_H2";
            n.carrier = Carrier::hydrogen;
            claim_id(n.id);
            h2_sub.emplace(node_id, n.id);
            new_nodes.push_back(std::move(n));
        }
        for (const auto& [seg_id, iface_id] : split.interfaces) {
            NetworkNode n;
            n.id = iface_id;
            n.location = original->location;
            n.kind = NodeKind::junction;
            n.carrier = Carrier::transitional;
            claim_id(n.id);
            new_nodes.push_back(std::move(n));
            interface_of.emplace(seg_id + "@" + node_id, iface_id);
            split_interface_segments.insert(seg_id);
        }
    }

    // Rebind segment endpoints at split sites.
    for (PipelineSegment& s : ds.segments) {
        for (std::string* end : {&s.from_node, &s.to_node}) {
            auto it = splits.find(*end);
            if (it == splits.end()) continue;
            const detail::CarrierTimeline tl = detail::timeline_of(s);
            if (tl.kind == detail::CarrierTimeline::flips_at) {
                *end = interface_of.at(s.id + "@" + *end);
            } else if (tl.kind == detail::CarrierTimeline::always_ng) {
                *end = ng_sub.at(*end);
            } else {
                *end = h2_sub.at(*end);
            }
        }
    }

    for (FacilityPoint& f : ds.facilities) {
        if (!f.attached_node) continue;
        auto it = splits.find(*f.attached_node);
        if (it == splits.end()) continue;
        f.attached_node = (f.carrier == Carrier::hydrogen)
                              ? h2_sub.at(*f.attached_node)
                              : ng_sub.at(*f.attached_node);
    }

    std::erase_if(ds.nodes,
                  [&splits](const NetworkNode& n) { return splits.count(n.id); });
    for (NetworkNode& n : new_nodes) ds.nodes.push_back(std::move(n));
    std::sort(ds.nodes.begin(), ds.nodes.end(),
              [](const NetworkNode& a, const NetworkNode& b) { return a.id < b.id; });
    return ds;
}

// ---------------------------------------------------------------------------
// Short-pipe generation

// Wires every split site so that each interface node stays connected to the
// natural gas side until its repurposing year and joins the hydrogen side
// from that year on. The natural-gas-side anchor is the `_NG` sub-node when
// one exists, otherwise the interface that flips last; the hydrogen-side
// anchor is the `_H2` sub-node or the interface that flips first. Each
// interface therefore receives at most one connector per side, and a site
// with two repurposing years and a remaining natural gas pipe yields the
// classic three-connector pattern (early-year connector deactivating first,
// late-year connector deactivating at its own year, and one hydrogen-side
// connector activating when the later pipe flips). Explicit short pipes in
// the plan suppress generation at every site whose nodes they touch.
inline NetworkDataset generate_short_pipes(const NetworkDataset& input,
                                           const TransitionPlan& plan) {
    NetworkDataset ds = input;

    std::unordered_set<std::string> node_ids;
    for (const NetworkNode& n : ds.nodes) node_ids.insert(n.id);
    std::unordered_set<std::string> pipe_ids;
    for (const ShortPipe& sp : ds.short_pipes) pipe_ids.insert(sp.id);

    for (const ShortPipe& sp : plan.explicit_short_pipes)
        for (const std::string& end : {sp.from_node, sp.to_node})
            if (!node_ids.count(end))
                throw DataError("explicit short pipe '" + sp.id +
                                "' references unknown node '" + end + "'");

    // Group nodes by exact coordinates; split sub-nodes share them bitwise.
    std::map<std::pair<double, double>, std::vector<const NetworkNode*>> sites;
    for (const NetworkNode& n : ds.nodes)
        sites[{n.location.lon, n.location.lat}].push_back(&n);

    // Interface node -> its repurposed segment's year.
    std::unordered_map<std::string, int> flip_year;
    for (const PipelineSegment& s : ds.segments) {
        if (s.status != SegmentStatus::repurposed) continue;
        for (const std::string& end : {s.from_node, s.to_node}) {
            const NetworkNode* n = find_node(ds, end);
            if (n && n->carrier == Carrier::transitional)
                flip_year.emplace(n->id, *s.repurpose_year);
        }
    }

    std::unordered_set<std::string> suppressed;  // nodes under explicit wiring
    for (const ShortPipe& sp : plan.explicit_short_pipes) {
        suppressed.insert(sp.from_node);
        suppressed.insert(sp.to_node);
    }

    auto add_pipe = [&](std::string id, const std::string& from,
                        const std::string& to, std::optional<int> activate,
                        std::optional<int> deactivate) {
        if (!pipe_ids.insert(id).second)
            throw DataError("generated short pipe id '" + id +
                            "' collides with an existing one");
        ShortPipe sp;
        sp.id = std::move(id);
        sp.from_node = from;
        sp.to_node = to;
        sp.activate_year = activate;
        sp.deactivate_year = deactivate;
        ds.short_pipes.push_back(std::move(sp));
    };

    for (const auto& [coord, members] : sites) {
        (void)coord;
        std::vector<std::pair<int, std::string>> interfaces;  // (year, node id)
        const NetworkNode* ng_hub = nullptr;
        const NetworkNode* h2_hub = nullptr;
        for (const NetworkNode* n : members) {
            if (n->carrier == Carrier::transitional) {
                auto it = flip_year.find(n->id);
                if (it != flip_year.end()) interfaces.emplace_back(it->second, n->id);
            } else if (n->carrier == Carrier::natural_gas) {
                if (!ng_hub || n->id < ng_hub->id) ng_hub = n;
            } else if (n->carrier == Carrier::hydrogen) {
                if (!h2_hub || n->id < h2_hub->id) h2_hub = n;
            }
        }
        if (interfaces.empty()) continue;
        bool touched = false;
        for (const NetworkNode* n : members)
            if (suppressed.count(n->id)) touched = true;
        if (touched) continue;

        std::sort(interfaces.begin(), interfaces.end());

        const std::string ng_anchor =
            ng_hub ? ng_hub->id : interfaces.back().second;
        const std::string h2_anchor =
            h2_hub ? h2_hub->id : interfaces.front().second;

        for (const auto& [year, iface] : interfaces) {
            if (iface != ng_anchor)
                add_pipe("SP_" + iface + "_NG", iface, ng_anchor, std::nullopt,
                         year);
            if (iface != h2_anchor)
                add_pipe("SP_" + iface + "_H2", iface, h2_anchor, year,
                         std::nullopt);
        }
    }

    for (const ShortPipe& sp : plan.explicit_short_pipes) {
        if (!pipe_ids.insert(sp.id).second)
            throw DataError("explicit short pipe id '" + sp.id +
                            "' collides with an existing one");
        ds.short_pipes.push_back(sp);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Regional demand

// Places one demand point per region at the area-weighted centroid of its
// boundary ring.
inline NetworkDataset assign_regional_demand(
    const NetworkDataset& input, const std::vector<RegionDemandSpec>& specs) {
    NetworkDataset ds = input;
    std::unordered_set<std::string> ids;
    for (const DemandPoint& d : ds.demand_points) ids.insert(d.id);
    for (const RegionDemandSpec& spec : specs) {
        if (spec.nuts3.empty())
            throw DataError("region demand spec without nuts3 code");
        if (!(spec.annual_demand >= 0.0))
            throw DataError("region '" + spec.nuts3 + "': demand must be >= 0");
        DemandPoint d;
        d.id = "demand_" + spec.nuts3 + "_" +
               (spec.carrier == Carrier::hydrogen ? "h2" : "ng");
        if (!ids.insert(d.id).second)
            throw DataError("duplicate demand point id '" + d.id + "'");
        try {
            d.location = planar_ring_centroid(spec.ring);
        } catch (const DataError& e) {
            throw DataError("region '" + spec.nuts3 + "': " + e.what());
        }
        d.nuts3 = spec.nuts3;
        d.carrier = spec.carrier;
        d.annual_demand = spec.annual_demand;
        ds.demand_points.push_back(std::move(d));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// File formats

// Parses one GeoJSON LineString feature into a new-build hydrogen segment.
// Requires properties id and commission_year.
inline PipelineSegment parse_new_build_feature(const json& f) {
    if (!f.is_object() || !f.contains("properties") || !f.contains("geometry"))
        throw SchemaError("new_builds entries must be GeoJSON features");
    const json& props = f.at("properties");
    const std::string id = detail::require_string(props, "id", "new build");
    const std::string ctx = "new build '" + id + "'";
    PipelineSegment s;
    s.id = id;
    s.geometry = detail::parse_linestring_geometry(f.at("geometry"), ctx);
    s.carrier = Carrier::hydrogen;
    s.status = SegmentStatus::new_build;
    s.category = category_from_string(
        props.value("category", std::string("transmission")), ctx + ": category");
    s.commission_year = detail::optional_year(props, "commission_year", ctx);
    if (!s.commission_year)
        throw SchemaError(ctx + ": commission_year is required");
    s.diameter_min_mm = detail::optional_number(props, "diameter_min_mm", ctx);
    s.diameter_max_mm = detail::optional_number(props, "diameter_max_mm", ctx);
    s.pressure_min_bar = detail::optional_number(props, "pressure_min_bar", ctx);
    s.pressure_max_bar = detail::optional_number(props, "pressure_max_bar", ctx);
    s.name = detail::optional_string(props, "name", ctx);
    return s;
}

// Plan file, JSON syntax:
//   { "horizon": [...], "repurpose": [{"segment": id, "year": y}, ...],
//     "new_builds": [GeoJSON segment features], "short_pipes": [...] }
inline TransitionPlan load_transition_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw SchemaError("transition plan must be a JSON object");

    TransitionPlan plan;
    for (const json& y : doc.value("horizon", json::array())) {
        if (!y.is_number_integer())
            throw SchemaError("plan horizon entries must be integer years");
        plan.horizon.push_back(y.get<int>());
    }
    for (const json& r : doc.value("repurpose", json::array())) {
        if (!r.is_object() || !r.contains("segment") || !r.contains("year"))
            throw SchemaError("repurpose entries need 'segment' and 'year'");
        RepurposeEntry e;
        e.segment_id = r.at("segment").get<std::string>();
        if (!r.at("year").is_number_integer())
            throw SchemaError("repurpose year for '" + e.segment_id +
                              "' must be an integer");
        e.year = r.at("year").get<int>();
        plan.repurpose.push_back(std::move(e));
    }
    for (const json& f : doc.value("new_builds", json::array()))
        plan.new_builds.push_back(parse_new_build_feature(f));
    for (const json& p : doc.value("short_pipes", json::array())) {
        if (!p.is_object())
            throw SchemaError("short_pipes entries must be objects");
        ShortPipe sp;
        sp.id = detail::require_string(p, "id", "explicit short pipe");
        const std::string ctx = "short pipe '" + sp.id + "'";
        sp.from_node = detail::require_string(p, "from_node", ctx);
        sp.to_node = detail::require_string(p, "to_node", ctx);
        sp.activate_year = detail::optional_year(p, "activate_year", ctx);
        sp.deactivate_year = detail::optional_year(p, "deactivate_year", ctx);
        plan.explicit_short_pipes.push_back(std::move(sp));
    }
    return plan;
}

// Demand specs as GeoJSON Polygons with properties nuts3, annual_demand,
// carrier. Only the outer ring is used.
inline std::vector<RegionDemandSpec> load_demand_specs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != std::string("FeatureCollection"))
        throw SchemaError("demand specs must be a GeoJSON FeatureCollection");

    std::vector<RegionDemandSpec> specs;
    for (const json& f : doc.value("features", json::array())) {
        if (!f.is_object() || !f.contains("properties") || !f.contains("geometry"))
            throw SchemaError("demand spec entries must be GeoJSON features");
        const json& props = f.at("properties");
        RegionDemandSpec spec;
        spec.nuts3 = detail::require_string(props, "nuts3", "demand region");
        const std::string ctx = "demand region '" + spec.nuts3 + "'";
        const json& geom = f.at("geometry");
        if (!geom.is_object() || geom.value("type", "") != std::string("Polygon"))
            throw SchemaError(ctx + ": geometry must be a Polygon");
        const json& rings = geom.at("coordinates");
        if (!rings.is_array() || rings.empty())
            throw SchemaError(ctx + ": malformed Polygon coordinates");
        for (const json& c : rings[0]) {
            if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
                throw SchemaError(ctx + ": malformed Polygon coordinates");
            spec.ring.push_back(GeoPoint{c[0].get<double>(), c[1].get<double>()});
        }
        if (spec.ring.size() < 4 || !(spec.ring.front() == spec.ring.back()))
            throw SchemaError(ctx + ": polygon ring must be closed");
        if (const auto v = detail::optional_number(props, "annual_demand", ctx))
            spec.annual_demand = *v;
        spec.carrier = carrier_from_string(
            props.value("carrier", std::string("hydrogen")), ctx + ": carrier");
        specs.push_back(std::move(spec));
    }
    return specs;
}

// Fixed-order plan application: repurpose, add new builds, split shared
// nodes, generate short pipes, place regional demand.
inline NetworkDataset apply_transition(const NetworkDataset& input,
                                       const TransitionPlan& plan,
                                       const std::vector<RegionDemandSpec>& specs = {},
                                       double snap_tolerance_m = 100.0) {
    NetworkDataset ds = apply_repurposing(input, plan);
    ds = add_new_builds(ds, plan, snap_tolerance_m);
    ds = split_shared_nodes(ds, build_graph(ds));
    ds = generate_short_pipes(ds, plan);
    ds = assign_regional_demand(ds, specs);
    if (!plan.horizon.empty()) ds.metadata.horizon = plan.horizon;
    return ds;
}

}  // namespace gasgraph
