#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/geo.hpp"

namespace gasgraph {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string feature_id_of(const json& props) {
    if (props.contains("id") && props.at("id").is_string())
        return props.at("id").get<std::string>();
    return "<missing id>";
}

inline std::string require_string(const json& props, const char* key,
                                  const std::string& ctx) {
    if (!props.contains(key))
        throw SchemaError(ctx + ": missing required property '" + key + "'");
    const json& v = props.at(key);
    if (!v.is_string())
        throw SchemaError(ctx + ": property '" + key + "' must be a string");
    return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const json& props,
                                                  const char* key,
                                                  const std::string& ctx) {
    if (!props.contains(key) || props.at(key).is_null()) return std::nullopt;
    const json& v = props.at(key);
    if (!v.is_string())
        throw SchemaError(ctx + ": property '" + key + "' must be a string");
    return v.get<std::string>();
}

inline std::optional<double> optional_number(const json& props, const char* key,
                                             const std::string& ctx) {
    if (!props.contains(key) || props.at(key).is_null()) return std::nullopt;
    const json& v = props.at(key);
    if (!v.is_number())
        throw SchemaError(ctx + ": property '" + key + "' must be a number");
    return v.get<double>();
}

inline std::optional<int> optional_year(const json& props, const char* key,
                                        const std::string& ctx) {
    if (!props.contains(key) || props.at(key).is_null()) return std::nullopt;
    const json& v = props.at(key);
    if (!v.is_number_integer())
        throw SchemaError(ctx + ": property '" + key + "' must be an integer year");
    return v.get<int>();
}

inline GeoPoint parse_point_geometry(const json& geom, const std::string& ctx) {
    if (!geom.is_object() || geom.value("type", "") != std::string("Point"))
        throw SchemaError(ctx + ": geometry must be a Point");
    const json& c = geom.at("coordinates");
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
        throw SchemaError(ctx + ": malformed Point coordinates");
    GeoPoint p{c[0].get<double>(), c[1].get<double>()};
    if (!point_is_finite(p) || !point_in_bounds(p))
        throw SchemaError(ctx + ": coordinates outside WGS84 bounds");
    return p;
}

inline Polyline parse_linestring_geometry(const json& geom,
                                          const std::string& ctx) {
    if (!geom.is_object() || geom.value("type", "") != std::string("LineString"))
        throw SchemaError(ctx + ": geometry must be a LineString");
    const json& coords = geom.at("coordinates");
    if (!coords.is_array())
        throw SchemaError(ctx + ": malformed LineString coordinates");
    Polyline line;
    line.reserve(coords.size());
    for (const json& c : coords) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
            throw SchemaError(ctx + ": malformed LineString coordinates");
        line.push_back(GeoPoint{c[0].get<double>(), c[1].get<double>()});
    }
    if (const std::string p = polyline_problem(line); !p.empty())
        throw SchemaError(ctx + ": geometry: " + p);
    return line;
}

inline ordered_json point_geometry(const GeoPoint& p) {
    ordered_json g;
    g["type"] = "Point";
    g["coordinates"] = ordered_json::array({p.lon, p.lat});
    return g;
}

inline ordered_json linestring_geometry(const Polyline& line) {
    ordered_json g;
    g["type"] = "LineString";
    ordered_json coords = ordered_json::array();
    for (const GeoPoint& p : line)
        coords.push_back(ordered_json::array({p.lon, p.lat}));
    g["coordinates"] = std::move(coords);
    return g;
}

template <typename T>
void set_if(ordered_json& props, const char* key, const std::optional<T>& v) {
    if (v) props[key] = *v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsing

inline NetworkDataset dataset_from_geojson(const json& doc) {
    if (!doc.is_object() || doc.value("type", "") != std::string("FeatureCollection"))
        throw SchemaError("input is not a GeoJSON FeatureCollection");

    NetworkDataset ds;
    if (doc.contains("metadata")) {
        const json& m = doc.at("metadata");
        if (!m.is_object()) throw SchemaError("metadata must be an object");
        ds.metadata.crs = m.value("crs", std::string("EPSG:4326"));
        ds.metadata.demand_unit = m.value("demand_unit", std::string("GWh/a"));
        if (m.contains("horizon")) {
            for (const json& y : m.at("horizon")) {
                if (!y.is_number_integer())
                    throw SchemaError("metadata.horizon entries must be integer years");
                ds.metadata.horizon.push_back(y.get<int>());
            }
        }
        if (m.contains("exceptions")) {
            for (const json& e : m.at("exceptions")) {
                if (!e.is_string())
                    throw SchemaError("metadata.exceptions entries must be strings");
                ds.metadata.exceptions.push_back(e.get<std::string>());
            }
        }
    }

    const json empty_features = json::array();
    const json& features =
        doc.contains("features") ? doc.at("features") : empty_features;
    if (!features.is_array()) throw SchemaError("features must be an array");

    for (const json& f : features) {
        if (!f.is_object() || f.value("type", "") != std::string("Feature"))
            throw SchemaError("every entry in features must be a Feature");
        if (!f.contains("properties") || !f.at("properties").is_object())
            throw SchemaError("feature without properties object");
        const json& props = f.at("properties");
        const std::string layer =
            detail::require_string(props, "layer", "feature '" +
                                   detail::feature_id_of(props) + "'");
        const std::string id = detail::require_string(
            props, "id", layer + " feature '" + detail::feature_id_of(props) + "'");
        const std::string ctx = layer + " '" + id + "'";
        if (!f.contains("geometry"))
            throw SchemaError(ctx + ": missing geometry");
        const json& geom = f.at("geometry");

        if (layer == "node") {
            NetworkNode n;
            n.id = id;
            n.location = detail::parse_point_geometry(geom, ctx);
            n.kind = node_kind_from_string(
                props.value("kind", std::string("junction")), ctx + ": kind");
            n.carrier = carrier_from_string(
                props.value("carrier", std::string("natural_gas")),
                ctx + ": carrier");
            n.nuts3 = detail::optional_string(props, "nuts3", ctx);
            ds.nodes.push_back(std::move(n));
        } else if (layer == "segment") {
            PipelineSegment s;
            s.id = id;
            s.geometry = detail::parse_linestring_geometry(geom, ctx);
            s.from_node = props.value("from_node", std::string());
            s.to_node = props.value("to_node", std::string());
            s.carrier = carrier_from_string(
                props.value("carrier", std::string("natural_gas")),
                ctx + ": carrier");
            s.category = category_from_string(
                props.value("category", std::string("transmission")),
                ctx + ": category");
            s.status = status_from_string(
                props.value("status", std::string("existing")), ctx + ": status");
            s.diameter_min_mm = detail::optional_number(props, "diameter_min_mm", ctx);
            s.diameter_max_mm = detail::optional_number(props, "diameter_max_mm", ctx);
            s.pressure_min_bar = detail::optional_number(props, "pressure_min_bar", ctx);
            s.pressure_max_bar = detail::optional_number(props, "pressure_max_bar", ctx);
            s.repurpose_year = detail::optional_year(props, "repurpose_year", ctx);
            s.commission_year = detail::optional_year(props, "commission_year", ctx);
            if (const auto len = detail::optional_number(props, "length_km", ctx))
                s.length_km = *len;
            s.name = detail::optional_string(props, "name", ctx);
            s.attr_source = attr_source_from_string(
                props.value("attr_source", std::string("unset")),
                ctx + ": attr_source");
            ds.segments.push_back(std::move(s));
        } else if (layer == "short_pipe") {
            ShortPipe sp;
            sp.id = id;
            sp.from_node = detail::require_string(props, "from_node", ctx);
            sp.to_node = detail::require_string(props, "to_node", ctx);
            sp.activate_year = detail::optional_year(props, "activate_year", ctx);
            sp.deactivate_year = detail::optional_year(props, "deactivate_year", ctx);
            ds.short_pipes.push_back(std::move(sp));
        } else if (layer == "facility") {
            FacilityPoint fp;
            fp.id = id;
            fp.location = detail::parse_point_geometry(geom, ctx);
            fp.kind = node_kind_from_string(
                detail::require_string(props, "kind", ctx), ctx + ": kind");
            fp.carrier = carrier_from_string(
                props.value("carrier", std::string("natural_gas")),
                ctx + ": carrier");
            fp.attached_node = detail::optional_string(props, "attached_node", ctx);
            ds.facilities.push_back(std::move(fp));
        } else if (layer == "demand") {
            DemandPoint d;
            d.id = id;
            d.location = detail::parse_point_geometry(geom, ctx);
            d.nuts3 = detail::require_string(props, "nuts3", ctx);
            d.carrier = carrier_from_string(
                props.value("carrier", std::string("natural_gas")),
                ctx + ": carrier");
            if (const auto v = detail::optional_number(props, "annual_demand", ctx))
                d.annual_demand = *v;
            ds.demand_points.push_back(std::move(d));
        } else {
            throw SchemaError("feature '" + id + "': unknown layer '" + layer + "'");
        }
    }

    validate_dataset(ds);        // verifies stored lengths against geometry
    populate_segment_lengths(ds);
    return ds;
}

inline NetworkDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
    return dataset_from_geojson(doc);
}

// ---------------------------------------------------------------------------
// Serialization. Output is canonical: features sorted by layer then id, fixed
// property order, absent optionals omitted entirely. Saving the same dataset
// twice produces byte-identical files.

inline ordered_json dataset_to_geojson(const NetworkDataset& ds) {
    ordered_json doc;
    doc["type"] = "FeatureCollection";
    ordered_json meta;
    meta["crs"] = ds.metadata.crs;
    meta["demand_unit"] = ds.metadata.demand_unit;
    meta["horizon"] = ds.metadata.horizon;
    meta["exceptions"] = ds.metadata.exceptions;
    doc["metadata"] = std::move(meta);

    ordered_json features = ordered_json::array();

    auto sorted_indices = [](const auto& records) {
        std::vector<std::size_t> idx(records.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&records](std::size_t a, std::size_t b) {
            return records[a].id < records[b].id;
        });
        return idx;
    };

    auto node_loc = [&ds](const std::string& id) -> std::optional<GeoPoint> {
        for (const NetworkNode& n : ds.nodes)
            if (n.id == id) return n.location;
        return std::nullopt;
    };

    for (std::size_t i : sorted_indices(ds.nodes)) {
        const NetworkNode& n = ds.nodes[i];
        ordered_json props;
        props["layer"] = "node";
        props["id"] = n.id;
        props["kind"] = to_string(n.kind);
        props["carrier"] = to_string(n.carrier);
        detail::set_if(props, "nuts3", n.nuts3);
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::point_geometry(n.location);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    for (std::size_t i : sorted_indices(ds.segments)) {
        const PipelineSegment& s = ds.segments[i];
        ordered_json props;
        props["layer"] = "segment";
        props["id"] = s.id;
        if (!s.from_node.empty()) props["from_node"] = s.from_node;
        if (!s.to_node.empty()) props["to_node"] = s.to_node;
        props["carrier"] = to_string(s.carrier);
        props["category"] = to_string(s.category);
        props["status"] = to_string(s.status);
        detail::set_if(props, "diameter_min_mm", s.diameter_min_mm);
        detail::set_if(props, "diameter_max_mm", s.diameter_max_mm);
        detail::set_if(props, "pressure_min_bar", s.pressure_min_bar);
        detail::set_if(props, "pressure_max_bar", s.pressure_max_bar);
        detail::set_if(props, "repurpose_year", s.repurpose_year);
        detail::set_if(props, "commission_year", s.commission_year);
        if (s.length_km > 0.0) props["length_km"] = s.length_km;
        detail::set_if(props, "name", s.name);
        props["attr_source"] = to_string(s.attr_source);
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::linestring_geometry(s.geometry);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    for (std::size_t i : sorted_indices(ds.short_pipes)) {
        const ShortPipe& sp = ds.short_pipes[i];
        ordered_json props;
        props["layer"] = "short_pipe";
        props["id"] = sp.id;
        props["from_node"] = sp.from_node;
        props["to_node"] = sp.to_node;
        detail::set_if(props, "activate_year", sp.activate_year);
        detail::set_if(props, "deactivate_year", sp.deactivate_year);
        // Short pipes are topological; the point geometry is only a map hint.
        GeoPoint loc{0.0, 0.0};
        if (auto p = node_loc(sp.from_node)) loc = *p;
        else if (auto q = node_loc(sp.to_node)) loc = *q;
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::point_geometry(loc);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    for (std::size_t i : sorted_indices(ds.facilities)) {
        const FacilityPoint& fp = ds.facilities[i];
        ordered_json props;
        props["layer"] = "facility";
        props["id"] = fp.id;
        props["kind"] = to_string(fp.kind);
        props["carrier"] = to_string(fp.carrier);
        detail::set_if(props, "attached_node", fp.attached_node);
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = detail::point_geometry(fp.location);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }

    for (std::size_t i : sorted_indices(ds.demand_points)) {
        const DemandPoint& d = ds.demand_points[i];
        ordered_json props;
        props["layer"] = "demand";
        props["id"] = d.id;
        props["nuts3"] = d.nuts3;
        props["carrier"] = to_string(d.carrier);
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

inline void save_dataset(const NetworkDataset& ds, const std::string& path) {
    const ordered_json doc = dataset_to_geojson(ds);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace gasgraph
