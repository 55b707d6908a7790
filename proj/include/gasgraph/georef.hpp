#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gasgraph/errors.hpp"
#include "gasgraph/geo.hpp"

namespace gasgraph {

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

using PixelPolyline = std::vector<PixelPoint>;

struct ControlPointPair {
    PixelPoint image;
    GeoPoint geo;
};

// Six-parameter map from image coordinates to geographic coordinates:
// lon = a*x + b*y + c, lat = d*x + e*y + f.
struct AffineTransform {
    double a = 1.0, b = 0.0, c = 0.0;
    double d = 0.0, e = 1.0, f = 0.0;

    GeoPoint apply(const PixelPoint& p) const {
        return GeoPoint{a * p.x + b * p.y + c, d * p.x + e * p.y + f};
    }

    double det() const { return a * e - b * d; }

    AffineTransform inverse() const {
        const double dt = det();
        if (std::abs(dt) < 1e-300)
            throw DataError("affine transform is not invertible");
        AffineTransform inv;
        inv.a = e / dt;
        inv.b = -b / dt;
        inv.d = -d / dt;
        inv.e = a / dt;
        inv.c = -(inv.a * c + inv.b * f);
        inv.f = -(inv.d * c + inv.e * f);
        return inv;
    }
};

struct ResidualReport {
    std::vector<double> meters;  // per control point, haversine error
    double max_m = 0.0;
    double rms_m = 0.0;
};

struct AffineFit {
    AffineTransform transform;
    ResidualReport residuals;
};

namespace detail {

// Gaussian elimination with partial pivoting for a 3x3 system.
inline std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        if (std::abs(m[col][col]) < 1e-12)
            throw DataError("control points are collinear in image space; "
                            "the affine fit is singular");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double factor = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[r][k] -= factor * m[col][k];
        }
    }
    return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

}  // namespace detail

// Least-squares fit of the affine transform from >= 3 control point pairs.
// Coordinates are centered and scaled before forming the normal equations so
// the fit stays well conditioned for pixel coordinates in the thousands.
inline AffineFit estimate_affine(const std::vector<ControlPointPair>& pairs) {
    if (pairs.size() < 3)
        throw DataError("at least 3 control point pairs are required, got " +
                        std::to_string(pairs.size()));
    for (const ControlPointPair& p : pairs)
        if (!std::isfinite(p.image.x) || !std::isfinite(p.image.y) ||
            !point_is_finite(p.geo))
            throw DataError("control point pairs must be finite");

    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0, mlon = 0.0, mlat = 0.0;
    for (const ControlPointPair& p : pairs) {
        mx += p.image.x;
        my += p.image.y;
        mlon += p.geo.lon;
        mlat += p.geo.lat;
    }
    mx /= n;
    my /= n;
    mlon /= n;
    mlat /= n;

    double spread = 0.0;
    for (const ControlPointPair& p : pairs)
        spread += std::abs(p.image.x - mx) + std::abs(p.image.y - my);
    const double scale = std::max(spread / (2.0 * n), 1e-12);

    // Normal equations for u = (x-mx)/s, v = (y-my)/s against centered geo.
    std::array<std::array<double, 4>, 3> mu{};
    std::array<std::array<double, 4>, 3> mv{};
    for (const ControlPointPair& p : pairs) {
        const double u = (p.image.x - mx) / scale;
        const double v = (p.image.y - my) / scale;
        const double glon = p.geo.lon - mlon;
        const double glat = p.geo.lat - mlat;
        const std::array<double, 3> row{u, v, 1.0};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                mu[i][j] += row[i] * row[j];
                mv[i][j] += row[i] * row[j];
            }
            mu[i][3] += row[i] * glon;
            mv[i][3] += row[i] * glat;
        }
    }

    const std::array<double, 3> lon_coef = detail::solve3(mu);
    const std::array<double, 3> lat_coef = detail::solve3(mv);

    AffineTransform t;
    t.a = lon_coef[0] / scale;
    t.b = lon_coef[1] / scale;
    t.c = lon_coef[2] - (lon_coef[0] * mx + lon_coef[1] * my) / scale + mlon;
    t.d = lat_coef[0] / scale;
    t.e = lat_coef[1] / scale;
    t.f = lat_coef[2] - (lat_coef[0] * mx + lat_coef[1] * my) / scale + mlat;

    if (t.det() == 0.0)
        throw DataError("fitted affine transform is degenerate (zero determinant)");

    AffineFit fit;
    fit.transform = t;
    fit.residuals.meters.reserve(pairs.size());
    double sum_sq = 0.0;
    for (const ControlPointPair& p : pairs) {
        const double r = haversine_m(t.apply(p.image), p.geo);
        fit.residuals.meters.push_back(r);
        fit.residuals.max_m = std::max(fit.residuals.max_m, r);
        sum_sq += r * r;
    }
    fit.residuals.rms_m = std::sqrt(sum_sq / n);
    return fit;
}

// Per-vertex application of the transform. Output must land inside WGS84
// bounds and form a valid polyline.
inline Polyline apply_transform(const AffineTransform& t,
                                const PixelPolyline& pixels) {
    if (t.det() == 0.0)
        throw DataError("affine transform is not invertible");
    Polyline out;
    out.reserve(pixels.size());
    for (const PixelPoint& p : pixels) {
        const GeoPoint g = t.apply(p);
        if (!point_is_finite(g) || !point_in_bounds(g))
            throw DataError("transformed vertex (" + std::to_string(g.lon) +
                            ", " + std::to_string(g.lat) +
                            ") is outside WGS84 bounds");
        out.push_back(g);
    }
    if (const std::string problem = polyline_problem(out); !problem.empty())
        throw DataError("transformed polyline invalid: " + problem);
    return out;
}

// Control point file: one pair per line, four numeric fields `x y lon lat`,
// `#` starts a comment.
inline std::vector<ControlPointPair> read_control_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::vector<ControlPointPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        double x, y, lon, lat;
        if (!(fields >> x)) continue;  // blank or comment-only line
        if (!(fields >> y >> lon >> lat))
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": expected 4 numeric fields 'x y lon lat'");
        double extra;
        if (fields >> extra)
            throw SchemaError(path + ":" + std::to_string(lineno) +
                              ": expected exactly 4 fields");
        pairs.push_back(ControlPointPair{PixelPoint{x, y}, GeoPoint{lon, lat}});
    }
    return pairs;
}

}  // namespace gasgraph
