#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/geo.hpp"

namespace gasgraph {

enum class EdgeKind { segment, short_pipe };

struct IncidentEdge {
    EdgeKind kind;
    std::string id;
    std::string other;  // node id at the far end
};

// Undirected adjacency over segments and short pipes. Built from a dataset
// whose segment endpoints are bound; immutable and shareable afterwards.
struct Graph {
    std::map<std::string, std::vector<IncidentEdge>> adjacency;
};

inline Graph build_graph(const NetworkDataset& ds) {
    Graph g;
    for (const NetworkNode& n : ds.nodes) g.adjacency[n.id];
    auto add = [&g](EdgeKind kind, const std::string& id, const std::string& a,
                    const std::string& b) {
        auto ia = g.adjacency.find(a);
        auto ib = g.adjacency.find(b);
        if (ia == g.adjacency.end() || ib == g.adjacency.end())
            throw DataError("edge '" + id + "' references unknown node '" +
                            (ia == g.adjacency.end() ? a : b) + "'");
        ia->second.push_back(IncidentEdge{kind, id, b});
        ib->second.push_back(IncidentEdge{kind, id, a});
    };
    for (const PipelineSegment& s : ds.segments) {
        if (s.from_node.empty() || s.to_node.empty())
            throw DataError("segment '" + s.id +
                            "' has unbound endpoints; run snapping first");
        add(EdgeKind::segment, s.id, s.from_node, s.to_node);
    }
    for (const ShortPipe& sp : ds.short_pipes)
        add(EdgeKind::short_pipe, sp.id, sp.from_node, sp.to_node);
    return g;
}

namespace detail {

// Latitude-keyed node index for radius queries. Latitude difference bounds
// the great-circle distance, so scanning a latitude band and checking each
// entry with haversine is exact.
class NodeLocator {
public:
    void insert(const std::string& id, const GeoPoint& p, bool spawned) {
        entries_.emplace(p.lat, Entry{p, id, spawned});
    }

    struct Hit {
        std::string id;
        double distance_m;
        bool spawned;
    };

    std::vector<Hit> within(const GeoPoint& p, double tol_m) const {
        const double band = tol_m / kMetersPerDegree + 1e-12;
        auto lo = entries_.lower_bound(p.lat - band);
        auto hi = entries_.upper_bound(p.lat + band);
        std::vector<Hit> hits;
        for (auto it = lo; it != hi; ++it) {
            const double d = haversine_m(p, it->second.location);
            if (d <= tol_m) hits.push_back(Hit{it->second.id, d, it->second.spawned});
        }
        return hits;
    }

private:
    struct Entry {
        GeoPoint location;
        std::string id;
        bool spawned;
    };
    std::multimap<double, Entry> entries_;
};

inline std::string fresh_junction_id(const std::unordered_set<std::string>& taken,
                                     std::size_t& counter) {
    for (;;) {
        ++counter;
        std::string id = "J" + std::to_string(counter);
        if (counter < 1000) {
            id = "J";
            std::string num = std::to_string(counter);
            id.append(4 - num.size(), '0');
            id += num;
        }
        if (!taken.count(id)) return id;
    }
}

}  // namespace detail

struct SnapResult {
    NetworkDataset dataset;
    Graph graph;
};

// Merges nodes closer than the tolerance, binds every segment endpoint to the
// nearest in-tolerance node (pre-existing nodes win over junctions spawned in
// this pass, ties go to the lexicographically smallest id) and spawns a fresh
// junction where no node is in reach. An endpoint within tolerance of two
// nodes that are themselves further apart than the tolerance is ambiguous and
// reported as an error rather than silently resolved. Idempotent.
inline SnapResult snap_and_build(const NetworkDataset& input,
                                 double snap_tolerance_m) {
    if (snap_tolerance_m < 0.0)
        throw DataError("snap tolerance must be >= 0");

    NetworkDataset ds = input;

    // Deduplicate existing nodes: processed in id order, a node within
    // tolerance of an already-kept node merges into the nearest one.
    std::vector<std::size_t> order(ds.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&ds](std::size_t a, std::size_t b) {
        return ds.nodes[a].id < ds.nodes[b].id;
    });

    detail::NodeLocator locator;
    std::unordered_map<std::string, std::string> remap;
    std::unordered_set<std::string> kept_ids;
    std::vector<NetworkNode> kept_nodes;
    for (std::size_t i : order) {
        const NetworkNode& n = ds.nodes[i];
        auto hits = locator.within(n.location, snap_tolerance_m);
        if (hits.empty()) {
            locator.insert(n.id, n.location, false);
            kept_ids.insert(n.id);
            kept_nodes.push_back(n);
        } else {
            std::sort(hits.begin(), hits.end(),
                      [](const auto& a, const auto& b) {
                          return std::tie(a.distance_m, a.id) <
                                 std::tie(b.distance_m, b.id);
                      });
            remap.emplace(n.id, hits.front().id);
        }
    }
    ds.nodes = std::move(kept_nodes);

    auto remapped = [&remap](const std::string& id) {
        auto it = remap.find(id);
        return it == remap.end() ? id : it->second;
    };
    for (PipelineSegment& s : ds.segments) {
        if (!s.from_node.empty()) s.from_node = remapped(s.from_node);
        if (!s.to_node.empty()) s.to_node = remapped(s.to_node);
    }
    for (ShortPipe& sp : ds.short_pipes) {
        sp.from_node = remapped(sp.from_node);
        sp.to_node = remapped(sp.to_node);
    }
    for (FacilityPoint& f : ds.facilities)
        if (f.attached_node) f.attached_node = remapped(*f.attached_node);

    // Bind segment endpoints, spawning junctions as needed.
    std::unordered_set<std::string> all_ids = kept_ids;
    std::size_t junction_counter = 0;

    std::vector<std::size_t> seg_order(ds.segments.size());
    for (std::size_t i = 0; i < seg_order.size(); ++i) seg_order[i] = i;
    std::sort(seg_order.begin(), seg_order.end(),
              [&ds](std::size_t a, std::size_t b) {
                  return ds.segments[a].id < ds.segments[b].id;
              });

    auto bind_endpoint = [&](PipelineSegment& s, const GeoPoint& p,
                             std::string& slot) {
        auto hits = locator.within(p, snap_tolerance_m);
        // Pre-existing nodes take priority over junctions spawned here.
        const bool any_existing =
            std::any_of(hits.begin(), hits.end(),
                        [](const auto& h) { return !h.spawned; });
        if (any_existing)
            hits.erase(std::remove_if(hits.begin(), hits.end(),
                                      [](const auto& h) { return h.spawned; }),
                       hits.end());
        if (hits.size() >= 2) {
            std::sort(hits.begin(), hits.end(),
                      [](const auto& a, const auto& b) { return a.id < b.id; });
            for (std::size_t i = 0; i < hits.size(); ++i)
                for (std::size_t j = i + 1; j < hits.size(); ++j) {
                    const NetworkNode* a = find_node(ds, hits[i].id);
                    const NetworkNode* b = find_node(ds, hits[j].id);
                    if (a && b &&
                        haversine_m(a->location, b->location) > snap_tolerance_m)
                        throw DataError(
                            "ambiguous snap: segment '" + s.id +
                            "' endpoint is within tolerance of nodes '" +
                            hits[i].id + "' and '" + hits[j].id +
                            "' which are further apart than the tolerance");
                }
        }
        if (!hits.empty()) {
            std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
                return std::tie(a.distance_m, a.id) < std::tie(b.distance_m, b.id);
            });
            slot = hits.front().id;
            return;
        }
        NetworkNode j;
        j.id = detail::fresh_junction_id(all_ids, junction_counter);
        j.location = p;
        j.kind = NodeKind::junction;
        j.carrier = (s.carrier == Carrier::hydrogen) ? Carrier::hydrogen
                                                     : Carrier::natural_gas;
        slot = j.id;
        all_ids.insert(j.id);
        locator.insert(j.id, p, true);
        ds.nodes.push_back(std::move(j));
    };

    for (std::size_t i : seg_order) {
        PipelineSegment& s = ds.segments[i];
        bind_endpoint(s, s.geometry.front(), s.from_node);
        bind_endpoint(s, s.geometry.back(), s.to_node);
    }

    Graph g = build_graph(ds);
    return SnapResult{std::move(ds), std::move(g)};
}

// Connected components of the subgraph formed by edges passing the filter.
// Only nodes incident to at least one such edge appear. Components and their
// members are sorted for deterministic output.
template <typename EdgeFilter>
std::vector<std::vector<std::string>> connected_components(const Graph& g,
                                                           EdgeFilter filter) {
    std::set<std::string> pending;
    for (const auto& [node, edges] : g.adjacency)
        for (const IncidentEdge& e : edges)
            if (filter(e.kind, e.id)) {
                pending.insert(node);
                break;
            }

    std::vector<std::vector<std::string>> components;
    std::unordered_set<std::string> seen;
    for (const std::string& start : pending) {
        if (seen.count(start)) continue;
        std::vector<std::string> component;
        std::vector<std::string> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            std::string node = std::move(stack.back());
            stack.pop_back();
            component.push_back(node);
            for (const IncidentEdge& e : g.adjacency.at(node)) {
                if (!filter(e.kind, e.id)) continue;
                if (seen.insert(e.other).second) stack.push_back(e.other);
            }
        }
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
    }
    std::sort(components.begin(), components.end());
    return components;
}

inline std::vector<std::vector<std::string>> connected_components(const Graph& g) {
    return connected_components(g, [](EdgeKind, const std::string&) { return true; });
}

enum class L1Class { transmission_connected, downstream };

// A Level 1 distribution segment is transmission_connected when it shares a
// node with a transmission segment, downstream when it reaches transmission
// only through other distribution pipes (or not at all).
inline std::map<std::string, L1Class> classify_l1_segments(
    const Graph& g, const NetworkDataset& ds) {
    (void)g;
    std::unordered_set<std::string> transmission_nodes;
    for (const PipelineSegment& s : ds.segments)
        if (s.category == SegmentCategory::transmission) {
            transmission_nodes.insert(s.from_node);
            transmission_nodes.insert(s.to_node);
        }
    std::map<std::string, L1Class> out;
    for (const PipelineSegment& s : ds.segments) {
        if (s.category != SegmentCategory::distribution_l1) continue;
        const bool touches = transmission_nodes.count(s.from_node) ||
                             transmission_nodes.count(s.to_node);
        out.emplace(s.id, touches ? L1Class::transmission_connected
                                  : L1Class::downstream);
    }
    return out;
}

}  // namespace gasgraph
