#include <catch2/catch_amalgamated.hpp>

#include "gasgraph/geojson.hpp"
#include "support/fixtures.hpp"

using namespace gasgraph;
using testsupport::TempDir;

namespace {

const char* kEmptyCollection = R"({"type": "FeatureCollection", "features": []})";

// Four nodes in a row, three segments between them.
const char* kChainFixture = R"({
  "type": "FeatureCollection",
  "metadata": {"crs": "EPSG:4326", "demand_unit": "GWh/a",
               "horizon": [2030, 2040], "exceptions": ["AT33"]},
  "features": [
    {"type": "Feature", "geometry": {"type": "Point", "coordinates": [14.0, 47.0]},
     "properties": {"layer": "node", "id": "N1", "kind": "border_point"}},
    {"type": "Feature", "geometry": {"type": "Point", "coordinates": [14.2, 47.1]},
     "properties": {"layer": "node", "id": "N2"}},
    {"type": "Feature", "geometry": {"type": "Point", "coordinates": [14.4, 47.2]},
     "properties": {"layer": "node", "id": "N3"}},
    {"type": "Feature", "geometry": {"type": "Point", "coordinates": [14.6, 47.3]},
     "properties": {"layer": "node", "id": "N4", "nuts3": "AT130"}},
    {"type": "Feature",
     "geometry": {"type": "LineString", "coordinates": [[14.0, 47.0], [14.2, 47.1]]},
     "properties": {"layer": "segment", "id": "S1", "from_node": "N1",
                    "to_node": "N2", "diameter_min_mm": 500,
                    "diameter_max_mm": 600}},
    {"type": "Feature",
     "geometry": {"type": "LineString",
                  "coordinates": [[14.2, 47.1], [14.3, 47.18], [14.4, 47.2]]},
     "properties": {"layer": "segment", "id": "S2", "from_node": "N2",
                    "to_node": "N3", "name": "Mittellinie"}},
    {"type": "Feature",
     "geometry": {"type": "LineString", "coordinates": [[14.4, 47.2], [14.6, 47.3]]},
     "properties": {"layer": "segment", "id": "S3", "from_node": "N3",
                    "to_node": "N4", "category": "distribution_l1"}}
  ]
})";

}  // namespace

TEST_CASE("empty FeatureCollection loads to an empty dataset") {
    TempDir tmp("geojson_empty");
    testsupport::write_file(tmp.file("empty.geojson"), kEmptyCollection);
    const NetworkDataset ds = load_dataset(tmp.file("empty.geojson"));
    CHECK(ds.nodes.empty());
    CHECK(ds.segments.empty());
    CHECK(ds.short_pipes.empty());
    CHECK(ds.facilities.empty());
    CHECK(ds.demand_points.empty());
    CHECK(ds.metadata.crs == "EPSG:4326");
}

TEST_CASE("inverted pressure range is rejected naming the field") {
    TempDir tmp("geojson_badrange");
    const std::string doc = R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "LineString", "coordinates": [[14.0, 47.0], [14.2, 47.1]]},
         "properties": {"layer": "segment", "id": "BAD",
                        "pressure_min_bar": 70, "pressure_max_bar": 20}}
      ]})";
    testsupport::write_file(tmp.file("bad.geojson"), doc);
    try {
        load_dataset(tmp.file("bad.geojson"));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("BAD") != std::string::npos);
        CHECK(msg.find("pressure_min_bar") != std::string::npos);
    }
}

TEST_CASE("chain fixture loads with derived lengths") {
    TempDir tmp("geojson_chain");
    testsupport::write_file(tmp.file("chain.geojson"), kChainFixture);
    const NetworkDataset ds = load_dataset(tmp.file("chain.geojson"));
    REQUIRE(ds.segments.size() == 3);
    REQUIRE(ds.nodes.size() == 4);
    CHECK(ds.metadata.horizon == std::vector<int>{2030, 2040});
    CHECK(ds.metadata.exceptions == std::vector<std::string>{"AT33"});

    for (const PipelineSegment& s : ds.segments) {
        const double expect = testsupport::oracle_polyline_km(s.geometry);
        INFO("segment " << s.id);
        CHECK(s.length_km == Catch::Approx(expect).epsilon(0.001));
    }
}

TEST_CASE("unresolved node references are rejected") {
    TempDir tmp("geojson_badref");
    const std::string doc = R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "LineString", "coordinates": [[14.0, 47.0], [14.2, 47.1]]},
         "properties": {"layer": "segment", "id": "S1", "from_node": "GHOST",
                        "to_node": ""}}
      ]})";
    testsupport::write_file(tmp.file("badref.geojson"), doc);
    CHECK_THROWS_WITH(load_dataset(tmp.file("badref.geojson")),
                      Catch::Matchers::ContainsSubstring("GHOST"));
}

TEST_CASE("non-WGS84 crs is rejected, not reprojected") {
    TempDir tmp("geojson_crs");
    const std::string doc = R"({
      "type": "FeatureCollection",
      "metadata": {"crs": "EPSG:31287"},
      "features": []})";
    testsupport::write_file(tmp.file("crs.geojson"), doc);
    CHECK_THROWS_AS(load_dataset(tmp.file("crs.geojson")), SchemaError);
}

TEST_CASE("malformed geometry is rejected") {
    TempDir tmp("geojson_geom");
    const std::string doc = R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "LineString", "coordinates": [[14.0, 47.0]]},
         "properties": {"layer": "segment", "id": "SHORT"}}
      ]})";
    testsupport::write_file(tmp.file("geom.geojson"), doc);
    CHECK_THROWS_WITH(load_dataset(tmp.file("geom.geojson")),
                      Catch::Matchers::ContainsSubstring("SHORT"));
}

TEST_CASE("stored length far from geometry is rejected") {
    TempDir tmp("geojson_len");
    const std::string doc = R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "LineString", "coordinates": [[14.0, 47.0], [14.2, 47.1]]},
         "properties": {"layer": "segment", "id": "S1", "length_km": 999.0}}
      ]})";
    testsupport::write_file(tmp.file("len.geojson"), doc);
    CHECK_THROWS_WITH(load_dataset(tmp.file("len.geojson")),
                      Catch::Matchers::ContainsSubstring("length_km"));
}

TEST_CASE("save/load round trip is structurally identical") {
    TempDir tmp("geojson_roundtrip");

    SECTION("empty dataset") {
        NetworkDataset empty;
        save_dataset(empty, tmp.file("empty.geojson"));
        const NetworkDataset back = load_dataset(tmp.file("empty.geojson"));
        std::string why;
        CHECK(testsupport::datasets_equal(empty, back, &why));
        INFO(why);
    }

    SECTION("transitioned network with every layer") {
        NetworkDataset ds = testsupport::fig5_transitioned();
        FacilityPoint fac;
        fac.id = "storage_1";
        fac.location = {14.0, 47.5};
        fac.kind = NodeKind::storage;
        fac.attached_node = "A";
        ds.facilities.push_back(fac);
        DemandPoint dem;
        dem.id = "demand_AT130_h2";
        dem.location = {14.3, 47.9};
        dem.nuts3 = "AT130";
        dem.carrier = Carrier::hydrogen;
        dem.annual_demand = 120.5;
        ds.demand_points.push_back(dem);

        save_dataset(ds, tmp.file("fig5.geojson"));
        const NetworkDataset back = load_dataset(tmp.file("fig5.geojson"));
        std::string why;
        const bool equal = testsupport::datasets_equal(ds, back, &why);
        INFO(why);
        CHECK(equal);
    }

    SECTION("large synthetic network") {
        const NetworkDataset ds = testsupport::random_grid_network(50, 16, 7);
        REQUIRE(ds.segments.size() >= 1000);
        NetworkDataset with_lengths = ds;
        populate_segment_lengths(with_lengths);
        save_dataset(with_lengths, tmp.file("big.geojson"));
        const NetworkDataset back = load_dataset(tmp.file("big.geojson"));
        std::string why;
        const bool equal = testsupport::datasets_equal(with_lengths, back, &why);
        INFO(why);
        CHECK(equal);
    }
}

TEST_CASE("two consecutive saves are byte-identical") {
    TempDir tmp("geojson_bytes");
    const NetworkDataset ds = testsupport::fig5_transitioned();
    save_dataset(ds, tmp.file("a.geojson"));
    save_dataset(ds, tmp.file("b.geojson"));
    CHECK(testsupport::read_file(tmp.file("a.geojson")) ==
          testsupport::read_file(tmp.file("b.geojson")));
}

TEST_CASE("save -> load -> save is byte-identical") {
    TempDir tmp("geojson_stable");
    const NetworkDataset ds = testsupport::fig5_transitioned();
    save_dataset(ds, tmp.file("a.geojson"));
    const NetworkDataset back = load_dataset(tmp.file("a.geojson"));
    save_dataset(back, tmp.file("b.geojson"));
    CHECK(testsupport::read_file(tmp.file("a.geojson")) ==
          testsupport::read_file(tmp.file("b.geojson")));
}

TEST_CASE("optional attributes serialize as absent fields") {
    TempDir tmp("geojson_optional");
    NetworkDataset ds;
    ds.nodes = {testsupport::make_node("N1", 14.0, 47.0),
                testsupport::make_node("N2", 14.2, 47.1)};
    ds.segments = {testsupport::make_segment("S1", {{14.0, 47.0}, {14.2, 47.1}},
                                             "N1", "N2")};
    save_dataset(ds, tmp.file("opt.geojson"));
    const std::string text = testsupport::read_file(tmp.file("opt.geojson"));
    CHECK(text.find("diameter_min_mm") == std::string::npos);
    CHECK(text.find("pressure_min_bar") == std::string::npos);
    CHECK(text.find("repurpose_year") == std::string::npos);
    CHECK(text.find("null") == std::string::npos);
}
