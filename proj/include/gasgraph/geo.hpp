#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gasgraph/errors.hpp"

namespace gasgraph {

// Mean Earth radius (IUGG mean radius R1), kilometers.
inline constexpr double kEarthRadiusKm = 6371.0088;

// Meters per degree of latitude on the mean-radius sphere.
inline constexpr double kMetersPerDegree =
    kEarthRadiusKm * 1000.0 * std::numbers::pi / 180.0;

struct GeoPoint {
    double lon = 0.0;  // degrees, WGS84, [-180, 180]
    double lat = 0.0;  // degrees, WGS84, [-90, 90]

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Ordered vertex list; valid polylines have >= 2 vertices and no two
// consecutive identical points.
using Polyline = std::vector<GeoPoint>;

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Normalizes a longitude difference into [-180, 180].
inline double wrap_delta_deg(double d) {
    while (d > 180.0) d -= 360.0;
    while (d < -180.0) d += 360.0;
    return d;
}

inline bool point_is_finite(const GeoPoint& p) {
    return std::isfinite(p.lon) && std::isfinite(p.lat);
}

inline bool point_in_bounds(const GeoPoint& p) {
    return p.lon >= -180.0 && p.lon <= 180.0 && p.lat >= -90.0 && p.lat <= 90.0;
}

// Great-circle distance on the mean-radius sphere, kilometers.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    const double lat1 = deg_to_rad(a.lat);
    const double lat2 = deg_to_rad(b.lat);
    const double dlat = lat2 - lat1;
    const double dlon = deg_to_rad(wrap_delta_deg(b.lon - a.lon));
    const double sl = std::sin(dlat / 2.0);
    const double so = std::sin(dlon / 2.0);
    double h = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

inline double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    return haversine_km(a, b) * 1000.0;
}

// Returns an empty string for a valid polyline, otherwise a description of
// the first problem found.
inline std::string polyline_problem(const Polyline& line) {
    if (line.size() < 2) return "polyline has fewer than 2 vertices";
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (!point_is_finite(line[i]))
            return "vertex " + std::to_string(i) + " is not finite";
        if (!point_in_bounds(line[i]))
            return "vertex " + std::to_string(i) + " outside WGS84 bounds";
        if (i > 0 && line[i] == line[i - 1])
            return "consecutive identical vertices at " + std::to_string(i - 1) +
                   "/" + std::to_string(i);
    }
    return {};
}

// Sum of great-circle chord lengths over consecutive vertex pairs, km.
inline double geodesic_length_km(const Polyline& line) {
    double total = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i)
        total += haversine_km(line[i - 1], line[i]);
    return total;
}

// Distance in meters from point p to the chord a-b, computed in a local
// tangent plane centered at p (longitude scaled by cos(lat)). Adequate for
// the short chords and sub-kilometer buffers this library works with.
inline double point_to_chord_m(const GeoPoint& p, const GeoPoint& a,
                               const GeoPoint& b) {
    const double k = std::cos(deg_to_rad(p.lat));
    const double ax = deg_to_rad(wrap_delta_deg(a.lon - p.lon)) * k;
    const double ay = deg_to_rad(a.lat - p.lat);
    const double bx = deg_to_rad(wrap_delta_deg(b.lon - p.lon)) * k;
    const double by = deg_to_rad(b.lat - p.lat);
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(-(ax * dx + ay * dy) / len2, 0.0, 1.0);
    const double cx = ax + t * dx;
    const double cy = ay + t * dy;
    return std::sqrt(cx * cx + cy * cy) * kEarthRadiusKm * 1000.0;
}

// Minimum distance in meters from p to any chord of the polyline.
inline double point_to_polyline_m(const GeoPoint& p, const Polyline& line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < line.size(); ++i)
        best = std::min(best, point_to_chord_m(p, line[i - 1], line[i]));
    return best;
}

// Samples the polyline at intervals of step_m along each chord, keeping every
// original vertex. Interpolation is linear in lon/lat, which is fine for the
// short chords produced by digitized routes.
inline Polyline resample_polyline(const Polyline& line, double step_m) {
    Polyline out;
    if (line.empty()) return out;
    out.push_back(line.front());
    for (std::size_t i = 1; i < line.size(); ++i) {
        const GeoPoint& a = line[i - 1];
        const GeoPoint& b = line[i];
        const double chord_m = haversine_m(a, b);
        if (step_m > 0.0 && chord_m > step_m) {
            const auto n = static_cast<std::size_t>(chord_m / step_m);
            for (std::size_t j = 1; j <= n; ++j) {
                const double t = static_cast<double>(j) * step_m / chord_m;
                if (t >= 1.0) break;
                out.push_back(GeoPoint{a.lon + t * (b.lon - a.lon),
                                       a.lat + t * (b.lat - a.lat)});
            }
        }
        out.push_back(b);
    }
    return out;
}

// Area-weighted centroid of a closed planar ring in lon/lat space (shoelace
// formula). The ring must repeat its first vertex at the end.
inline GeoPoint planar_ring_centroid(const std::vector<GeoPoint>& ring) {
    if (ring.size() < 4 || !(ring.front() == ring.back()))
        throw DataError("polygon ring must be closed (first vertex == last)");
    double area2 = 0.0;  // twice the signed area
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[i + 1];
        const double cross = a.lon * b.lat - b.lon * a.lat;
        area2 += cross;
        cx += (a.lon + b.lon) * cross;
        cy += (a.lat + b.lat) * cross;
    }
    if (std::abs(area2) < 1e-15)
        throw DataError("degenerate polygon ring (zero area)");
    const double f = 1.0 / (3.0 * area2);
    return GeoPoint{cx * f, cy * f};
}

struct BBox {
    double min_lon = 0.0, min_lat = 0.0, max_lon = 0.0, max_lat = 0.0;
};

inline BBox bbox_of(const Polyline& line) {
    BBox b{180.0, 90.0, -180.0, -90.0};
    for (const GeoPoint& p : line) {
        b.min_lon = std::min(b.min_lon, p.lon);
        b.min_lat = std::min(b.min_lat, p.lat);
        b.max_lon = std::max(b.max_lon, p.lon);
        b.max_lat = std::max(b.max_lat, p.lat);
    }
    return b;
}

// Conservatively grows a box by a metric margin. Longitude expansion uses the
// smallest cosine inside the box so the expanded box never under-covers.
inline BBox bbox_expand_m(const BBox& b, double margin_m) {
    const double dlat = margin_m / kMetersPerDegree;
    const double worst_lat = std::max(std::abs(b.min_lat), std::abs(b.max_lat));
    const double c = std::max(std::cos(deg_to_rad(std::min(worst_lat, 89.0))), 1e-3);
    const double dlon = margin_m / (kMetersPerDegree * c);
    return BBox{b.min_lon - dlon, b.min_lat - dlat, b.max_lon + dlon,
                b.max_lat + dlat};
}

inline bool bbox_intersects(const BBox& a, const BBox& b) {
    return a.min_lon <= b.max_lon && b.min_lon <= a.max_lon &&
           a.min_lat <= b.max_lat && b.min_lat <= a.max_lat;
}

}  // namespace gasgraph
