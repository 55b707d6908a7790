#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "gasgraph/dataset.hpp"
#include "gasgraph/errors.hpp"
#include "gasgraph/geo.hpp"

namespace gasgraph {

// Attribute payload a reference feature can donate to a matched segment.
struct ReferenceAttributes {
    std::optional<std::string> name;
    std::optional<double> diameter_min_mm;
    std::optional<double> diameter_max_mm;
    std::optional<double> pressure_min_bar;
    std::optional<double> pressure_max_bar;
};

struct ReferenceFeature {
    std::string id;
    Polyline geometry;
    ReferenceAttributes attrs;
};

struct MatchCandidate {
    std::string candidate_id;
    double overlap_length_km = 0.0;  // portion of the target inside the buffer
    double mean_distance_m = 0.0;    // over the overlapping samples
    ReferenceAttributes attrs;
};

struct MatchResult {
    std::string target_id;
    std::optional<MatchCandidate> chosen;
    std::vector<MatchCandidate> all_candidates;  // ranked best-first
    double buffer_m = 0.0;
    std::vector<std::string> copied_fields;
};

struct MatchParams {
    double buffer_m = 200.0;
    double step_m = 25.0;
};

struct OverlapStats {
    double overlap_km = 0.0;
    double mean_distance_m = 0.0;
    std::size_t samples = 0;
    std::size_t inside = 0;
};

// Samples the target at step_m intervals (plus original vertices) and scores
// the fraction of samples whose distance to the candidate is within the
// buffer, scaled by the target's geodesic length.
inline OverlapStats overlap_stats(const Polyline& target,
                                  const Polyline& candidate, double buffer_m,
                                  double step_m) {
    if (buffer_m <= 0.0) throw DataError("buffer_m must be > 0");
    if (step_m <= 0.0) throw DataError("step_m must be > 0");

    OverlapStats stats;
    const BBox target_box = bbox_expand_m(bbox_of(target), buffer_m * 1.02);
    if (!bbox_intersects(target_box, bbox_of(candidate))) return stats;

    const Polyline samples = resample_polyline(target, step_m);
    stats.samples = samples.size();
    double dist_sum = 0.0;
    for (const GeoPoint& p : samples) {
        const double d = point_to_polyline_m(p, candidate);
        if (d <= buffer_m) {
            ++stats.inside;
            dist_sum += d;
        }
    }
    if (stats.inside > 0) {
        stats.mean_distance_m = dist_sum / static_cast<double>(stats.inside);
        stats.overlap_km = geodesic_length_km(target) *
                           static_cast<double>(stats.inside) /
                           static_cast<double>(stats.samples);
    }
    return stats;
}

inline double overlap_length_km(const Polyline& target, const Polyline& candidate,
                                double buffer_m, double step_m) {
    return overlap_stats(target, candidate, buffer_m, step_m).overlap_km;
}

// Candidates are reference features with positive overlap, ranked by overlap
// length, then by smaller mean distance, then by id. No match is a valid
// outcome.
inline MatchResult match_segment(const PipelineSegment& target,
                                 const std::vector<ReferenceFeature>& reference,
                                 double buffer_m, double step_m) {
    MatchResult result;
    result.target_id = target.id;
    result.buffer_m = buffer_m;
    for (const ReferenceFeature& ref : reference) {
        const OverlapStats s =
            overlap_stats(target.geometry, ref.geometry, buffer_m, step_m);
        if (s.overlap_km > 0.0)
            result.all_candidates.push_back(
                MatchCandidate{ref.id, s.overlap_km, s.mean_distance_m, ref.attrs});
    }
    std::sort(result.all_candidates.begin(), result.all_candidates.end(),
              [](const MatchCandidate& a, const MatchCandidate& b) {
                  if (a.overlap_length_km != b.overlap_length_km)
                      return a.overlap_length_km > b.overlap_length_km;
                  return std::tie(a.mean_distance_m, a.candidate_id) <
                         std::tie(b.mean_distance_m, b.candidate_id);
              });
    if (!result.all_candidates.empty()) result.chosen = result.all_candidates.front();
    return result;
}

inline std::vector<MatchResult> match_all(
    const NetworkDataset& ds, const std::vector<ReferenceFeature>& reference,
    const MatchParams& params = {}) {
    std::vector<const PipelineSegment*> targets;
    targets.reserve(ds.segments.size());
    for (const PipelineSegment& s : ds.segments) targets.push_back(&s);
    std::sort(targets.begin(), targets.end(),
              [](const PipelineSegment* a, const PipelineSegment* b) {
                  return a->id < b->id;
              });
    std::vector<MatchResult> results;
    results.reserve(targets.size());
    for (const PipelineSegment* t : targets)
        results.push_back(
            match_segment(*t, reference, params.buffer_m, params.step_m));
    return results;
}

inline const std::set<std::string>& assignable_fields() {
    static const std::set<std::string> fields{
        "name", "diameter_min_mm", "diameter_max_mm", "pressure_min_bar",
        "pressure_max_bar"};
    return fields;
}

// Copies the listed fields from each chosen candidate onto its target.
// A field is written only when it is still unset on the target or when the
// segment's attributes came from a previous matching run; values marked
// manual are never replaced. Geometry and topology are never touched.
// Re-runnable against updated reference data.
inline NetworkDataset assign_attributes(const NetworkDataset& input,
                                        std::vector<MatchResult>& results,
                                        const std::vector<std::string>& fields) {
    for (const std::string& f : fields)
        if (!assignable_fields().count(f))
            throw DataError("field '" + f + "' cannot be assigned by matching");

    NetworkDataset ds = input;
    auto seg_index = index_by_id(ds.segments);

    for (MatchResult& r : results) {
        r.copied_fields.clear();
        if (!r.chosen) continue;
        auto it = seg_index.find(r.target_id);
        if (it == seg_index.end())
            throw DataError("match result for unknown segment '" + r.target_id + "'");
        PipelineSegment& seg = ds.segments[it->second];
        const ReferenceAttributes& attrs = r.chosen->attrs;
        const bool refreshable = seg.attr_source == AttrSource::matched ||
                                 seg.attr_source == AttrSource::unset;

        auto copy = [&]<typename T>(const char* field, const std::optional<T>& src,
                                    std::optional<T>& dst) {
            if (!src) return;
            if (std::find(fields.begin(), fields.end(), field) == fields.end())
                return;
            if (dst && !refreshable) return;  // manual/assumed values stay
            if (dst == src) return;
            dst = src;
            r.copied_fields.push_back(field);
        };

        copy("name", attrs.name, seg.name);
        copy("diameter_min_mm", attrs.diameter_min_mm, seg.diameter_min_mm);
        copy("diameter_max_mm", attrs.diameter_max_mm, seg.diameter_max_mm);
        copy("pressure_min_bar", attrs.pressure_min_bar, seg.pressure_min_bar);
        copy("pressure_max_bar", attrs.pressure_max_bar, seg.pressure_max_bar);

        if (!r.copied_fields.empty() && seg.attr_source != AttrSource::manual)
            seg.attr_source = AttrSource::matched;
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Reference dataset loading

// Field map file: one `source_property target_field` pair per line, `#`
// comments. The same source property may feed several target fields.
using FieldMap = std::vector<std::pair<std::string, std::string>>;

inline FieldMap default_field_map() {
    return FieldMap{{"name", "name"},
                    {"diameter_min_mm", "diameter_min_mm"},
                    {"diameter_max_mm", "diameter_max_mm"},
                    {"pressure_min_bar", "pressure_min_bar"},
                    {"pressure_max_bar", "pressure_max_bar"}};
}

inline FieldMap read_field_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    FieldMap map;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string source, target;
        if (!(fields >> source)) continue;
        if (!(fields >> target))
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": expected 'source_property target_field'");
        if (!assignable_fields().count(target))
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": unknown target field '" + target + "'");
        map.emplace_back(source, target);
    }
    return map;
}

// Reads a reference FeatureCollection of LineStrings with free-form
// properties, adapting names through the field map. Numeric targets accept
// numbers or numeric strings.
inline std::vector<ReferenceFeature> load_reference(const std::string& path,
                                                    const FieldMap& map) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != std::string("FeatureCollection"))
        throw SchemaError("reference '" + path + "' is not a FeatureCollection");

    auto as_number = [](const nlohmann::json& v) -> std::optional<double> {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            try {
                std::size_t pos = 0;
                const double d = std::stod(v.get<std::string>(), &pos);
                if (pos == v.get<std::string>().size()) return d;
            } catch (...) {
            }
        }
        return std::nullopt;
    };

    std::vector<ReferenceFeature> out;
    std::size_t counter = 0;
    for (const nlohmann::json& f : doc.value("features", nlohmann::json::array())) {
        ++counter;
        if (!f.is_object() || !f.contains("geometry")) continue;
        const nlohmann::json& geom = f.at("geometry");
        if (!geom.is_object() || geom.value("type", "") != std::string("LineString"))
            continue;  // reference sets may mix point features in; skip them
        ReferenceFeature ref;
        const nlohmann::json props =
            f.contains("properties") && f.at("properties").is_object()
                ? f.at("properties")
                : nlohmann::json::object();
        if (props.contains("id") && props.at("id").is_string())
            ref.id = props.at("id").get<std::string>();
        else if (f.contains("id") && f.at("id").is_string())
            ref.id = f.at("id").get<std::string>();
        else
            ref.id = "ref_" + std::to_string(counter);

        const std::string ctx = "reference '" + ref.id + "'";
        Polyline line;
        for (const nlohmann::json& c : geom.value("coordinates", nlohmann::json::array())) {
            if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
                throw SchemaError(ctx + ": malformed LineString coordinates");
            line.push_back(GeoPoint{c[0].get<double>(), c[1].get<double>()});
        }
        if (const std::string p = polyline_problem(line); !p.empty())
            throw SchemaError(ctx + ": geometry: " + p);
        ref.geometry = std::move(line);

        for (const auto& [source, target] : map) {
            if (!props.contains(source) || props.at(source).is_null()) continue;
            const nlohmann::json& v = props.at(source);
            if (target == "name") {
                if (v.is_string()) ref.attrs.name = v.get<std::string>();
            } else if (const auto num = as_number(v)) {
                if (target == "diameter_min_mm") ref.attrs.diameter_min_mm = num;
                else if (target == "diameter_max_mm") ref.attrs.diameter_max_mm = num;
                else if (target == "pressure_min_bar") ref.attrs.pressure_min_bar = num;
                else if (target == "pressure_max_bar") ref.attrs.pressure_max_bar = num;
            }
        }
        out.push_back(std::move(ref));
    }
    return out;
}

// Machine-readable provenance of a matching run.
inline nlohmann::ordered_json match_report_json(
    const std::vector<MatchResult>& results) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const MatchResult& r : results) {
        nlohmann::ordered_json entry;
        entry["target_id"] = r.target_id;
        entry["buffer_m"] = r.buffer_m;
        if (r.chosen) {
            entry["chosen"] = r.chosen->candidate_id;
            entry["overlap_length_km"] = r.chosen->overlap_length_km;
            entry["mean_distance_m"] = r.chosen->mean_distance_m;
        } else {
            entry["chosen"] = nullptr;
        }
        nlohmann::ordered_json cands = nlohmann::ordered_json::array();
        for (const MatchCandidate& c : r.all_candidates) {
            nlohmann::ordered_json jc;
            jc["candidate_id"] = c.candidate_id;
            jc["overlap_length_km"] = c.overlap_length_km;
            jc["mean_distance_m"] = c.mean_distance_m;
            cands.push_back(std::move(jc));
        }
        entry["candidates"] = std::move(cands);
        entry["copied_fields"] = r.copied_fields;
        arr.push_back(std::move(entry));
    }
    return arr;
}

}  // namespace gasgraph
