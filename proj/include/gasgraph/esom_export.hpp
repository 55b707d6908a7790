#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/geojson.hpp"
#include "gasgraph/temporal.hpp"

namespace gasgraph {

namespace detail {

// Shortest round-trip representation, identical across runs.
inline std::string csv_number(double v) { return nlohmann::json(v).dump(); }

inline std::string csv_opt(const std::optional<double>& v) {
    return v ? csv_number(*v) : std::string();
}

inline std::string csv_opt(const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string();
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace detail

// Per-year node table: network nodes incident to an active edge plus all
// demand points, with effective carriers.
inline void write_node_table(const NetworkDataset& ds, const TimestepView& view,
                             const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "id,lon,lat,carrier,kind,nuts3,demand\n";

    std::set<std::string> active_nodes;
    for (const ActiveEdge& e : view.active_edges) {
        active_nodes.insert(e.from);
        active_nodes.insert(e.to);
    }

    struct Row {
        std::string id;
        std::string line;
    };
    std::vector<Row> rows;
    for (const NetworkNode& n : ds.nodes) {
        if (!active_nodes.count(n.id)) continue;
        auto it = view.node_carrier.find(n.id);
        const Carrier c = it != view.node_carrier.end() ? it->second : n.carrier;
        rows.push_back(Row{
            n.id, detail::csv_escape(n.id) + ',' + detail::csv_number(n.location.lon) +
                      ',' + detail::csv_number(n.location.lat) + ',' +
                      std::string(to_string(c)) + ',' +
                      std::string(to_string(n.kind)) + ',' +
                      (n.nuts3 ? detail::csv_escape(*n.nuts3) : std::string()) +
                      ","});
    }
    for (const DemandPoint& d : ds.demand_points) {
        rows.push_back(Row{
            d.id, detail::csv_escape(d.id) + ',' + detail::csv_number(d.location.lon) +
                      ',' + detail::csv_number(d.location.lat) + ',' +
                      std::string(to_string(d.carrier)) + ",demand," +
                      detail::csv_escape(d.nuts3) + ',' +
                      detail::csv_number(d.annual_demand)});
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.id < b.id; });
    for (const Row& r : rows) out << r.line << '\n';
}

// Per-year edge table: exactly the active segments and short pipes.
inline void write_edge_table(const NetworkDataset& ds, const TimestepView& view,
                             const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "id,from,to,carrier,length_km,diameter_min_mm,diameter_max_mm,"
           "pressure_min_bar,pressure_max_bar,is_short_pipe\n";

    struct Row {
        std::string id;
        std::string line;
    };
    std::vector<Row> rows;
    for (const PipelineSegment& s : ds.segments) {
        auto it = view.active_segments.find(s.id);
        if (it == view.active_segments.end()) continue;
        rows.push_back(Row{
            s.id, detail::csv_escape(s.id) + ',' + detail::csv_escape(s.from_node) +
                      ',' + detail::csv_escape(s.to_node) + ',' +
                      std::string(to_string(it->second)) + ',' +
                      detail::csv_number(s.length_km) + ',' +
                      detail::csv_opt(s.diameter_min_mm) + ',' +
                      detail::csv_opt(s.diameter_max_mm) + ',' +
                      detail::csv_opt(s.pressure_min_bar) + ',' +
                      detail::csv_opt(s.pressure_max_bar) + ",false"});
    }
    std::set<std::string> active_pipes(view.active_short_pipes.begin(),
                                       view.active_short_pipes.end());
    for (const ShortPipe& sp : ds.short_pipes) {
        if (!active_pipes.count(sp.id)) continue;
        auto it = view.node_carrier.find(sp.from_node);
        const Carrier c =
            it != view.node_carrier.end() ? it->second : Carrier::natural_gas;
        rows.push_back(Row{sp.id, detail::csv_escape(sp.id) + ',' +
                                      detail::csv_escape(sp.from_node) + ',' +
                                      detail::csv_escape(sp.to_node) + ',' +
                                      std::string(to_string(c)) + ",,,,,,true"});
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.id < b.id; });
    for (const Row& r : rows) out << r.line << '\n';
}

// Year-independent combined edge table carrying the transition schedule, so
// consumers can re-derive any year's active set themselves.
inline void write_combined_edge_table(const NetworkDataset& ds,
                                      const std::filesystem::path& path) {
    std::ofstream out = detail::open_out(path);
    out << "id,from,to,carrier,category,status,length_km,diameter_min_mm,"
           "diameter_max_mm,pressure_min_bar,pressure_max_bar,repurpose_year,"
           "commission_year,activate_year,deactivate_year,is_short_pipe\n";

    struct Row {
        std::string id;
        std::string line;
    };
    std::vector<Row> rows;
    for (const PipelineSegment& s : ds.segments) {
        rows.push_back(Row{
            s.id,
            detail::csv_escape(s.id) + ',' + detail::csv_escape(s.from_node) + ',' +
                detail::csv_escape(s.to_node) + ',' +
                std::string(to_string(s.carrier)) + ',' +
                std::string(to_string(s.category)) + ',' +
                std::string(to_string(s.status)) + ',' +
                detail::csv_number(s.length_km) + ',' +
                detail::csv_opt(s.diameter_min_mm) + ',' +
                detail::csv_opt(s.diameter_max_mm) + ',' +
                detail::csv_opt(s.pressure_min_bar) + ',' +
                detail::csv_opt(s.pressure_max_bar) + ',' +
                detail::csv_opt(s.repurpose_year) + ',' +
                detail::csv_opt(s.commission_year) + ",,,false"});
    }
    for (const ShortPipe& sp : ds.short_pipes) {
        rows.push_back(Row{sp.id, detail::csv_escape(sp.id) + ',' +
                                      detail::csv_escape(sp.from_node) + ',' +
                                      detail::csv_escape(sp.to_node) +
                                      ",,,,,,,,,,," +
                                      detail::csv_opt(sp.activate_year) + ',' +
                                      detail::csv_opt(sp.deactivate_year) +
                                      ",true"});
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.id < b.id; });
    for (const Row& r : rows) out << r.line << '\n';
}

// Map-renderable snapshot of one year.
inline ordered_json timestep_view_geojson(const NetworkDataset& ds,
                                          const TimestepView& view) {
    ordered_json doc;
    doc["type"] = "FeatureCollection";
    ordered_json meta;
    meta["year"] = view.year;
    doc["metadata"] = std::move(meta);
    ordered_json features = ordered_json::array();

    std::map<std::string, const NetworkNode*> nodes;
    for (const NetworkNode& n : ds.nodes) nodes.emplace(n.id, &n);

    std::set<std::string> active_nodes;
    for (const ActiveEdge& e : view.active_edges) {
        active_nodes.insert(e.from);
        active_nodes.insert(e.to);
    }
    for (const auto& [id, n] : nodes) {
        if (!active_nodes.count(id)) continue;
        ordered_json props;
        props["layer"] = "node";
        props["id"] = id;
        props["carrier"] = to_string(view.node_carrier.at(id));
        props["kind"] = to_string(n->kind);
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::point_geometry(n->location);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    std::map<std::string, const PipelineSegment*> segs;
    for (const PipelineSegment& s : ds.segments) segs.emplace(s.id, &s);
    for (const auto& [id, carrier] : view.active_segments) {
        const PipelineSegment& s = *segs.at(id);
        ordered_json props;
        props["layer"] = "segment";
        props["id"] = id;
        props["carrier"] = to_string(carrier);
        props["status"] = to_string(s.status);
        props["category"] = to_string(s.category);
        props["length_km"] = s.length_km;
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::linestring_geometry(s.geometry);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    std::map<std::string, const ShortPipe*> pipes;
    for (const ShortPipe& sp : ds.short_pipes) pipes.emplace(sp.id, &sp);
    for (const std::string& id : view.active_short_pipes) {
        const ShortPipe& sp = *pipes.at(id);
        auto fi = nodes.find(sp.from_node);
        auto ti = nodes.find(sp.to_node);
        if (fi == nodes.end() || ti == nodes.end()) continue;
        ordered_json props;
        props["layer"] = "short_pipe";
        props["id"] = id;
        ordered_json f;
        f["type"] = "Feature";
        // Sub-nodes share coordinates, so this usually degenerates to a dot;
        // still a LineString so renderers can style connectors.
        ordered_json g;
        g["type"] = "LineString";
        g["coordinates"] = ordered_json::array(
            {ordered_json::array({fi->second->location.lon, fi->second->location.lat}),
             ordered_json::array({ti->second->location.lon, ti->second->location.lat})});
        f["geometry"] = std::move(g);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    for (const DemandPoint& d : ds.demand_points) {
        ordered_json props;
        props["layer"] = "demand";
        props["id"] = d.id;
        props["carrier"] = to_string(d.carrier);
        props["nuts3"] = d.nuts3;
        props["annual_demand"] = d.annual_demand;
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::point_geometry(d.location);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    doc["features"] = std::move(features);
    return doc;
}

// Writes per-year tables plus the combined schedule table into out_dir.
// format is "csv" or "geojson".
inline void export_tables(const NetworkDataset& ds, const std::vector<int>& years,
                          const std::filesystem::path& out_dir,
                          const std::string& format) {
    if (format != "csv" && format != "geojson")
        throw DataError("unknown export format '" + format + "'");
    std::filesystem::create_directories(out_dir);
    for (int year : years) {
        const TimestepView view = topology_at(ds, year);
        if (format == "csv") {
            write_node_table(ds, view,
                             out_dir / ("nodes_" + std::to_string(year) + ".csv"));
            write_edge_table(ds, view,
                             out_dir / ("edges_" + std::to_string(year) + ".csv"));
        } else {
            std::ofstream out = detail::open_out(
                out_dir / ("view_" + std::to_string(year) + ".geojson"));
            out << timestep_view_geojson(ds, view).dump(2) << '\n';
        }
    }
    if (format == "csv")
        write_combined_edge_table(ds, out_dir / "edges_all.csv");
}

}  // namespace gasgraph
