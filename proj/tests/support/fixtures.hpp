#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles are
// deliberately written from scratch here so they do not share code with the
// library paths they check.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gasgraph/gasgraph.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Independent geodesic oracle (closed-form haversine, mean radius sphere).

inline double oracle_haversine_km(double lon1, double lat1, double lon2,
                                  double lat2) {
    constexpr double kR = 6371.0088;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    const double phi1 = lat1 * kDeg;
    const double phi2 = lat2 * kDeg;
    const double dphi = (lat2 - lat1) * kDeg;
    const double dlam = (lon2 - lon1) * kDeg;
    const double a = std::sin(dphi / 2.0) * std::sin(dphi / 2.0) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2.0) *
                         std::sin(dlam / 2.0);
    return 2.0 * kR * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

inline double oracle_polyline_km(const gasgraph::Polyline& line) {
    double total = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i)
        total += oracle_haversine_km(line[i - 1].lon, line[i - 1].lat,
                                     line[i].lon, line[i].lat);
    return total;
}

// ---------------------------------------------------------------------------
// Scratch directories

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::size_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("gasgraph_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// Dataset builders

inline gasgraph::NetworkNode make_node(const std::string& id, double lon,
                                       double lat,
                                       gasgraph::NodeKind kind =
                                           gasgraph::NodeKind::junction) {
    gasgraph::NetworkNode n;
    n.id = id;
    n.location = {lon, lat};
    n.kind = kind;
    return n;
}

inline gasgraph::PipelineSegment make_segment(
    const std::string& id, const gasgraph::Polyline& geometry,
    const std::string& from, const std::string& to,
    gasgraph::SegmentCategory category = gasgraph::SegmentCategory::transmission) {
    gasgraph::PipelineSegment s;
    s.id = id;
    s.geometry = geometry;
    s.from_node = from;
    s.to_node = to;
    s.category = category;
    s.length_km = gasgraph::geodesic_length_km(geometry);
    return s;
}

// Star junction at M with three pipes: two destined for repurposing in 2027
// and 2040 plus one that stays on natural gas. Applying the transition plan
// reproduces the three-connector switch-over pattern.
inline gasgraph::NetworkDataset fig5_input() {
    gasgraph::NetworkDataset ds;
    ds.metadata.horizon = {2027, 2030, 2035, 2040};
    ds.nodes = {
        make_node("A", 14.0, 47.5, gasgraph::NodeKind::border_point),
        make_node("B", 15.0, 47.7, gasgraph::NodeKind::border_point),
        make_node("C", 14.6, 48.0, gasgraph::NodeKind::border_point),
        make_node("M", 14.5, 47.6),
    };
    ds.segments = {
        make_segment("R1", {{14.0, 47.5}, {14.5, 47.6}}, "A", "M"),
        make_segment("R2", {{14.5, 47.6}, {15.0, 47.7}}, "M", "B"),
        make_segment("G", {{14.5, 47.6}, {14.6, 48.0}}, "M", "C"),
    };
    return ds;
}

inline gasgraph::TransitionPlan fig5_plan() {
    gasgraph::TransitionPlan plan;
    plan.horizon = {2027, 2030, 2035, 2040};
    plan.repurpose = {{"R1", 2027}, {"R2", 2040}};
    return plan;
}

inline gasgraph::NetworkDataset fig5_transitioned() {
    return gasgraph::apply_transition(fig5_input(), fig5_plan());
}

// Random connected network: a rough grid of nodes joined by two-point
// segments, all existing natural gas. Deterministic for a given seed.
inline gasgraph::NetworkDataset random_grid_network(std::size_t cols,
                                                    std::size_t rows,
                                                    unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.004, 0.004);
    gasgraph::NetworkDataset ds;
    ds.metadata.horizon = {2027, 2030, 2035, 2040};

    auto node_id = [cols](std::size_t c, std::size_t r) {
        return "N" + std::to_string(r * cols + c);
    };
    std::vector<std::vector<gasgraph::GeoPoint>> pts(
        rows, std::vector<gasgraph::GeoPoint>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            pts[r][c] = {10.0 + 0.05 * static_cast<double>(c) + jitter(rng),
                         47.0 + 0.05 * static_cast<double>(r) + jitter(rng)};
            ds.nodes.push_back(make_node(node_id(c, r), pts[r][c].lon,
                                         pts[r][c].lat));
        }
    // Border supply on the corners keeps components viable.
    ds.nodes[0].kind = gasgraph::NodeKind::border_point;
    ds.nodes.back().kind = gasgraph::NodeKind::border_point;

    std::size_t seg = 0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols)
                ds.segments.push_back(make_segment(
                    "S" + std::to_string(seg++), {pts[r][c], pts[r][c + 1]},
                    node_id(c, r), node_id(c + 1, r)));
            if (r + 1 < rows && (c + r) % 2 == 0)
                ds.segments.push_back(make_segment(
                    "S" + std::to_string(seg++), {pts[r][c], pts[r + 1][c]},
                    node_id(c, r), node_id(c, r + 1)));
        }
    return ds;
}

inline gasgraph::Polyline random_polyline(std::mt19937& rng,
                                          std::size_t min_pts = 2,
                                          std::size_t max_pts = 12) {
    std::uniform_int_distribution<std::size_t> n_dist(min_pts, max_pts);
    std::uniform_real_distribution<double> lon0(-170.0, 170.0);
    std::uniform_real_distribution<double> lat0(-60.0, 60.0);
    std::uniform_real_distribution<double> step(-0.05, 0.05);
    const std::size_t n = n_dist(rng);
    gasgraph::Polyline line;
    double lon = lon0(rng);
    double lat = lat0(rng);
    line.push_back({lon, lat});
    while (line.size() < n) {
        lon += step(rng);
        lat += step(rng);
        if (line.back().lon == lon && line.back().lat == lat) continue;
        line.push_back({lon, lat});
    }
    return line;
}

// ---------------------------------------------------------------------------
// Deep structural comparison (order-insensitive), used as the round-trip
// oracle.

inline bool same_optional_d(const std::optional<double>& a,
                            const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b;
}

inline bool datasets_equal(const gasgraph::NetworkDataset& x,
                           const gasgraph::NetworkDataset& y,
                           std::string* why = nullptr) {
    auto fail = [why](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (x.metadata.crs != y.metadata.crs) return fail("crs");
    if (x.metadata.demand_unit != y.metadata.demand_unit) return fail("demand_unit");
    if (x.metadata.horizon != y.metadata.horizon) return fail("horizon");
    if (x.metadata.exceptions != y.metadata.exceptions) return fail("exceptions");

    if (x.nodes.size() != y.nodes.size()) return fail("node count");
    if (x.segments.size() != y.segments.size()) return fail("segment count");
    if (x.short_pipes.size() != y.short_pipes.size()) return fail("short pipe count");
    if (x.facilities.size() != y.facilities.size()) return fail("facility count");
    if (x.demand_points.size() != y.demand_points.size()) return fail("demand count");

    for (const auto& n : x.nodes) {
        const gasgraph::NetworkNode* m = gasgraph::find_node(y, n.id);
        if (!m) return fail("node " + n.id + " missing");
        if (!(m->location == n.location) || m->kind != n.kind ||
            m->carrier != n.carrier || m->nuts3 != n.nuts3)
            return fail("node " + n.id + " differs");
    }
    auto seg_idx = gasgraph::index_by_id(y.segments);
    for (const auto& s : x.segments) {
        auto it = seg_idx.find(s.id);
        if (it == seg_idx.end()) return fail("segment " + s.id + " missing");
        const auto& t = y.segments[it->second];
        if (t.geometry != s.geometry || t.from_node != s.from_node ||
            t.to_node != s.to_node || t.carrier != s.carrier ||
            t.category != s.category || t.status != s.status ||
            !same_optional_d(t.diameter_min_mm, s.diameter_min_mm) ||
            !same_optional_d(t.diameter_max_mm, s.diameter_max_mm) ||
            !same_optional_d(t.pressure_min_bar, s.pressure_min_bar) ||
            !same_optional_d(t.pressure_max_bar, s.pressure_max_bar) ||
            t.repurpose_year != s.repurpose_year ||
            t.commission_year != s.commission_year || t.name != s.name ||
            t.attr_source != s.attr_source || t.length_km != s.length_km)
            return fail("segment " + s.id + " differs");
    }
    auto sp_idx = gasgraph::index_by_id(y.short_pipes);
    for (const auto& sp : x.short_pipes) {
        auto it = sp_idx.find(sp.id);
        if (it == sp_idx.end()) return fail("short pipe " + sp.id + " missing");
        const auto& t = y.short_pipes[it->second];
        if (t.from_node != sp.from_node || t.to_node != sp.to_node ||
            t.activate_year != sp.activate_year ||
            t.deactivate_year != sp.deactivate_year)
            return fail("short pipe " + sp.id + " differs");
    }
    auto fac_idx = gasgraph::index_by_id(y.facilities);
    for (const auto& f : x.facilities) {
        auto it = fac_idx.find(f.id);
        if (it == fac_idx.end()) return fail("facility " + f.id + " missing");
        const auto& t = y.facilities[it->second];
        if (!(t.location == f.location) || t.kind != f.kind ||
            t.carrier != f.carrier || t.attached_node != f.attached_node)
            return fail("facility " + f.id + " differs");
    }
    auto dem_idx = gasgraph::index_by_id(y.demand_points);
    for (const auto& d : x.demand_points) {
        auto it = dem_idx.find(d.id);
        if (it == dem_idx.end()) return fail("demand " + d.id + " missing");
        const auto& t = y.demand_points[it->second];
        if (!(t.location == d.location) || t.nuts3 != d.nuts3 ||
            t.carrier != d.carrier || t.annual_demand != d.annual_demand)
            return fail("demand " + d.id + " differs");
    }
    return true;
}

}  // namespace testsupport
