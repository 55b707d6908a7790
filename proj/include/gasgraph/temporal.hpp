#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"

namespace gasgraph {

// Effective carrier of a segment at a year. Repurposed pipes switch to
// hydrogen at their repurposing year (inclusive); new builds are hydrogen
// from the start, they just do not exist before commissioning.
inline Carrier carrier_at(const PipelineSegment& s, int year) {
    switch (s.status) {
        case SegmentStatus::existing: return s.carrier;
        case SegmentStatus::new_build: return Carrier::hydrogen;
        case SegmentStatus::repurposed:
            return year < *s.repurpose_year ? Carrier::natural_gas
                                            : Carrier::hydrogen;
    }
    return s.carrier;
}

inline bool segment_active(const PipelineSegment& s, int year) {
    return s.status != SegmentStatus::new_build || year >= *s.commission_year;
}

// Activation is inclusive, deactivation exclusive: a pipe deactivating in Y
// is already gone at Y. Chosen so that a repurposed pipe is never connected
// to both carriers in its switch-over year.
inline bool short_pipe_active(const ShortPipe& sp, int year) {
    if (sp.activate_year && year < *sp.activate_year) return false;
    if (sp.deactivate_year && year >= *sp.deactivate_year) return false;
    return true;
}

struct ActiveEdge {
    std::string id;
    std::string from;
    std::string to;
    Carrier carrier = Carrier::natural_gas;
    bool is_short_pipe = false;
};

// Snapshot of the network at one year: which edges are active and which
// effective carrier every node and segment has. Derived purely from the
// dataset; the same dataset and year always produce the same view.
struct TimestepView {
    int year = 0;
    std::map<std::string, Carrier> active_segments;
    std::vector<std::string> active_short_pipes;
    std::map<std::string, Carrier> node_carrier;
    std::vector<ActiveEdge> active_edges;
};

inline TimestepView topology_at(const NetworkDataset& ds, int year) {
    TimestepView view;
    view.year = year;

    // Incident repurposed/total segment bookkeeping per node: nodes incident
    // exclusively to repurposed and new-build pipes flip carrier together
    // with the repurposed ones; everything else keeps its static label.
    struct NodeTouch {
        const PipelineSegment* first_repurposed = nullptr;
        bool only_flipping = true;
        bool any_segment = false;
    };
    std::unordered_map<std::string, NodeTouch> touch;
    touch.reserve(ds.nodes.size());
    for (const NetworkNode& n : ds.nodes) touch[n.id];

    for (const PipelineSegment& s : ds.segments) {
        for (const std::string& end : {s.from_node, s.to_node}) {
            auto it = touch.find(end);
            if (it == touch.end()) continue;
            NodeTouch& t = it->second;
            t.any_segment = true;
            if (s.status == SegmentStatus::repurposed) {
                if (!t.first_repurposed || s.id < t.first_repurposed->id)
                    t.first_repurposed = &s;
            } else if (s.status != SegmentStatus::new_build) {
                t.only_flipping = false;
            }
        }
    }

    for (const NetworkNode& n : ds.nodes) {
        const NodeTouch& t = touch.at(n.id);
        if (n.carrier == Carrier::transitional) {
            if (!t.first_repurposed)
                throw DataError("transitional node '" + n.id +
                                "' has no incident repurposed segment");
            view.node_carrier[n.id] = carrier_at(*t.first_repurposed, year);
        } else if (t.any_segment && t.only_flipping && t.first_repurposed) {
            view.node_carrier[n.id] = carrier_at(*t.first_repurposed, year);
        } else {
            view.node_carrier[n.id] = n.carrier;
        }
    }

    for (const PipelineSegment& s : ds.segments) {
        if (!segment_active(s, year)) continue;
        const Carrier c = carrier_at(s, year);
        view.active_segments.emplace(s.id, c);
        view.active_edges.push_back(ActiveEdge{s.id, s.from_node, s.to_node, c, false});
    }
    for (const ShortPipe& sp : ds.short_pipes) {
        if (!short_pipe_active(sp, year)) continue;
        view.active_short_pipes.push_back(sp.id);
        auto it = view.node_carrier.find(sp.from_node);
        const Carrier c = it != view.node_carrier.end() ? it->second
                                                        : Carrier::natural_gas;
        view.active_edges.push_back(
            ActiveEdge{sp.id, sp.from_node, sp.to_node, c, true});
    }
    std::sort(view.active_short_pipes.begin(), view.active_short_pipes.end());
    std::sort(view.active_edges.begin(), view.active_edges.end(),
              [](const ActiveEdge& a, const ActiveEdge& b) { return a.id < b.id; });
    return view;
}

struct Violation {
    std::string check;  // "decoupling" or "supply"
    int year = 0;
    std::vector<std::string> ids;
    std::string message;
};

namespace detail {

// Connected components of the active subgraph, as sorted node-id lists.
inline std::vector<std::vector<std::string>> active_components(
    const TimestepView& view) {
    std::map<std::string, std::vector<const ActiveEdge*>> adj;
    for (const ActiveEdge& e : view.active_edges) {
        adj[e.from].push_back(&e);
        adj[e.to].push_back(&e);
    }
    std::vector<std::vector<std::string>> components;
    std::unordered_set<std::string> seen;
    for (const auto& [start, _] : adj) {
        if (seen.count(start)) continue;
        std::vector<std::string> component;
        std::vector<std::string> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            std::string node = std::move(stack.back());
            stack.pop_back();
            component.push_back(node);
            for (const ActiveEdge* e : adj.at(node)) {
                const std::string& other = (e->from == node) ? e->to : e->from;
                if (seen.insert(other).second) stack.push_back(other);
            }
        }
        std::sort(component.begin(), component.end());
        components.push_back(std::move(component));
    }
    std::sort(components.begin(), components.end());
    return components;
}

}  // namespace detail

// Flags every active edge joining nodes of different effective carriers and
// every connected component mixing both carriers. An empty list means the
// natural gas and hydrogen networks are fully decoupled at this year.
inline std::vector<Violation> validate_decoupling(const TimestepView& view) {
    std::vector<Violation> violations;
    for (const ActiveEdge& e : view.active_edges) {
        auto fi = view.node_carrier.find(e.from);
        auto ti = view.node_carrier.find(e.to);
        if (fi == view.node_carrier.end() || ti == view.node_carrier.end())
            continue;  // unresolved references surface in dataset validation
        if (fi->second != ti->second)
            violations.push_back(Violation{
                "decoupling", view.year,
                {e.id, e.from, e.to},
                std::string(e.is_short_pipe ? "short pipe '" : "segment '") +
                    e.id + "' connects " + std::string(to_string(fi->second)) +
                    " node '" + e.from + "' with " +
                    std::string(to_string(ti->second)) + " node '" + e.to + "'"});
    }
    for (const std::vector<std::string>& component :
         detail::active_components(view)) {
        bool ng = false, h2 = false;
        for (const std::string& node : component) {
            auto it = view.node_carrier.find(node);
            if (it == view.node_carrier.end()) continue;
            if (it->second == Carrier::natural_gas) ng = true;
            if (it->second == Carrier::hydrogen) h2 = true;
        }
        if (ng && h2)
            violations.push_back(Violation{
                "decoupling", view.year, component,
                "connected component mixes natural gas and hydrogen nodes"});
    }
    return violations;
}

namespace detail {

inline bool kind_supplies(NodeKind kind, bool component_has_ng,
                          bool component_has_h2) {
    switch (kind) {
        case NodeKind::border_point:
        case NodeKind::storage: return true;
        case NodeKind::biogas_plant: return component_has_ng;
        case NodeKind::electrolyzer: return component_has_h2;
        default: return false;
    }
}

}  // namespace detail

// Every connected component must contain a supply-capable element (border
// point or storage for either carrier, biogas plants for natural gas,
// electrolyzers for hydrogen) unless it intersects the exception list of
// region codes or node ids.
inline std::vector<Violation> validate_supply(
    const TimestepView& view, const NetworkDataset& ds,
    const std::vector<std::string>& exceptions) {
    std::set<std::string> exempt(exceptions.begin(), exceptions.end());
    std::unordered_map<std::string, const NetworkNode*> nodes;
    for (const NetworkNode& n : ds.nodes) nodes.emplace(n.id, &n);
    std::unordered_map<std::string, std::vector<const FacilityPoint*>> attached;
    for (const FacilityPoint& f : ds.facilities)
        if (f.attached_node) attached[*f.attached_node].push_back(&f);

    std::vector<Violation> violations;
    for (const std::vector<std::string>& component :
         detail::active_components(view)) {
        bool has_ng = false, has_h2 = false;
        for (const std::string& id : component) {
            auto it = view.node_carrier.find(id);
            if (it == view.node_carrier.end()) continue;
            if (it->second == Carrier::natural_gas) has_ng = true;
            if (it->second == Carrier::hydrogen) has_h2 = true;
        }
        bool supplied = false;
        bool excepted = false;
        for (const std::string& id : component) {
            if (exempt.count(id)) excepted = true;
            auto ni = nodes.find(id);
            if (ni == nodes.end()) continue;
            const NetworkNode& n = *ni->second;
            if (n.nuts3 && exempt.count(*n.nuts3)) excepted = true;
            if (detail::kind_supplies(n.kind, has_ng, has_h2)) supplied = true;
            if (auto ai = attached.find(id); ai != attached.end())
                for (const FacilityPoint* f : ai->second)
                    if (detail::kind_supplies(f->kind, has_ng, has_h2))
                        supplied = true;
            if (supplied || excepted) break;
        }
        if (!supplied && !excepted)
            violations.push_back(Violation{
                "supply", view.year, component,
                "component has no supply-capable node and is not excepted"});
    }
    return violations;
}

// Default validation years: the horizon plus the year before each stage, so
// both sides of every switch-over get checked.
inline std::vector<int> default_validation_years(const NetworkDataset& ds) {
    std::set<int> years;
    for (int y : ds.metadata.horizon) {
        years.insert(y);
        years.insert(y - 1);
    }
    return {years.begin(), years.end()};
}

inline std::vector<Violation> run_validation(
    const NetworkDataset& ds, const std::vector<int>& years,
    const std::vector<std::string>& extra_exceptions = {}) {
    std::vector<std::string> exceptions = ds.metadata.exceptions;
    exceptions.insert(exceptions.end(), extra_exceptions.begin(),
                      extra_exceptions.end());
    std::vector<Violation> all;
    for (int year : years) {
        const TimestepView view = topology_at(ds, year);
        for (auto& v : validate_decoupling(view)) all.push_back(std::move(v));
        for (auto& v : validate_supply(view, ds, exceptions))
            all.push_back(std::move(v));
    }
    return all;
}

inline std::string format_validation_text(const std::vector<Violation>& violations,
                                          const std::vector<int>& years) {
    std::ostringstream out;
    if (violations.empty()) {
        out << "validation passed for " << years.size() << " year(s):";
        for (int y : years) out << ' ' << y;
        out << '\n';
        return out.str();
    }
    for (const Violation& v : violations) {
        out << v.check << " @" << v.year << ": " << v.message << " [";
        for (std::size_t i = 0; i < v.ids.size(); ++i) {
            if (i) out << ' ';
            out << v.ids[i];
        }
        out << "]\n";
    }
    out << violations.size() << " violation(s)\n";
    return out.str();
}

inline nlohmann::ordered_json validation_report_json(
    const std::vector<Violation>& violations, const std::vector<int>& years) {
    nlohmann::ordered_json doc;
    doc["years"] = years;
    doc["ok"] = violations.empty();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Violation& v : violations) {
        nlohmann::ordered_json jv;
        jv["check"] = v.check;
        jv["year"] = v.year;
        jv["ids"] = v.ids;
        jv["message"] = v.message;
        arr.push_back(std::move(jv));
    }
    doc["violations"] = std::move(arr);
    return doc;
}

}  // namespace gasgraph
