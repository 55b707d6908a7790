#include <catch2/catch_amalgamated.hpp>

#include "gasgraph/defaults.hpp"
#include "support/fixtures.hpp"

using namespace gasgraph;
using testsupport::make_node;
using testsupport::make_segment;

namespace {

// One transmission pipe, an L1 pipe hanging off it, a downstream L1 pipe and
// an L2 pipe at the end.
NetworkDataset distribution_fixture() {
    NetworkDataset ds;
    ds.nodes = {make_node("N0", 14.0, 47.0), make_node("N1", 14.1, 47.0),
                make_node("N2", 14.2, 47.0), make_node("N3", 14.3, 47.0),
                make_node("N4", 14.4, 47.0)};
    ds.segments = {
        make_segment("trans", {{14.0, 47.0}, {14.1, 47.0}}, "N0", "N1",
                     SegmentCategory::transmission),
        make_segment("l1_connected", {{14.1, 47.0}, {14.2, 47.0}}, "N1", "N2",
                     SegmentCategory::distribution_l1),
        make_segment("l1_downstream", {{14.2, 47.0}, {14.3, 47.0}}, "N2", "N3",
                     SegmentCategory::distribution_l1),
        make_segment("l2", {{14.3, 47.0}, {14.4, 47.0}}, "N3", "N4",
                     SegmentCategory::distribution_l2),
    };
    return ds;
}

const PipelineSegment& seg(const NetworkDataset& ds, const std::string& id) {
    for (const PipelineSegment& s : ds.segments)
        if (s.id == id) return s;
    throw std::runtime_error("missing segment " + id);
}

}  // namespace

TEST_CASE("distribution defaults follow the parameter table") {
    const NetworkDataset ds = distribution_fixture();
    const Graph g = build_graph(ds);
    const NetworkDataset out = apply_distribution_defaults(ds, g);

    const PipelineSegment& connected = seg(out, "l1_connected");
    CHECK(connected.diameter_min_mm == 500.0);
    CHECK(connected.diameter_max_mm == 600.0);
    CHECK(connected.pressure_min_bar == 20.0);
    CHECK(connected.pressure_max_bar == 70.0);
    CHECK(connected.attr_source == AttrSource::assumed);

    const PipelineSegment& downstream = seg(out, "l1_downstream");
    CHECK(downstream.diameter_min_mm == 300.0);
    CHECK(downstream.diameter_max_mm == 400.0);
    CHECK(downstream.pressure_min_bar == 20.0);
    CHECK(downstream.pressure_max_bar == 70.0);

    const PipelineSegment& l2 = seg(out, "l2");
    CHECK(l2.diameter_min_mm == 100.0);
    CHECK(l2.diameter_max_mm == 200.0);
    CHECK(l2.pressure_min_bar == 6.0);
    CHECK(l2.pressure_max_bar == 16.0);

    const PipelineSegment& trans = seg(out, "trans");
    CHECK_FALSE(trans.diameter_min_mm.has_value());
    CHECK_FALSE(trans.pressure_min_bar.has_value());
    CHECK(trans.attr_source == AttrSource::unset);
}

TEST_CASE("re-application is a no-op") {
    const NetworkDataset ds = distribution_fixture();
    const Graph g = build_graph(ds);
    const NetworkDataset once = apply_distribution_defaults(ds, g);
    const NetworkDataset twice =
        apply_distribution_defaults(once, build_graph(once));
    std::string why;
    const bool equal = testsupport::datasets_equal(once, twice, &why);
    INFO(why);
    CHECK(equal);
}

TEST_CASE("per-field precedence: matched diameter stays, pressure fills") {
    NetworkDataset ds = distribution_fixture();
    for (PipelineSegment& s : ds.segments)
        if (s.id == "l1_connected") {
            s.diameter_min_mm = 480.0;
            s.diameter_max_mm = 520.0;
            s.attr_source = AttrSource::matched;
        }
    const Graph g = build_graph(ds);
    const NetworkDataset out = apply_distribution_defaults(ds, g);
    const PipelineSegment& s = seg(out, "l1_connected");
    CHECK(s.diameter_min_mm == 480.0);
    CHECK(s.diameter_max_mm == 520.0);
    CHECK(s.pressure_min_bar == 20.0);
    CHECK(s.pressure_max_bar == 70.0);
    CHECK(s.attr_source == AttrSource::matched);
}

TEST_CASE("manual values are never overwritten") {
    NetworkDataset ds = distribution_fixture();
    for (PipelineSegment& s : ds.segments)
        if (s.id == "l2") {
            s.diameter_min_mm = 110.0;
            s.diameter_max_mm = 110.0;
            s.pressure_min_bar = 4.0;
            s.pressure_max_bar = 4.0;
            s.attr_source = AttrSource::manual;
        }
    const Graph g = build_graph(ds);
    const NetworkDataset out = apply_distribution_defaults(ds, g);
    const PipelineSegment& s = seg(out, "l2");
    CHECK(s.diameter_min_mm == 110.0);
    CHECK(s.pressure_min_bar == 4.0);
    CHECK(s.attr_source == AttrSource::manual);
}

TEST_CASE("override table from file") {
    testsupport::TempDir tmp("defaults_table");
    testsupport::write_file(
        tmp.file("table.txt"),
        "# category connectivity field min max\n"
        "distribution_l1 transmission_connected diameter_mm 640 710\n"
        "distribution_l1 downstream diameter_mm 350 450\n"
        "distribution_l1 any pressure_bar 25 64\n"
        "distribution_l2 any diameter_mm 90 180\n"
        "distribution_l2 any pressure_bar 4 12\n");
    const auto table = read_default_table(tmp.file("table.txt"));
    REQUIRE(table.size() == 5);

    const NetworkDataset ds = distribution_fixture();
    const NetworkDataset out =
        apply_distribution_defaults(ds, build_graph(ds), table);
    CHECK(seg(out, "l1_connected").diameter_min_mm == 640.0);
    CHECK(seg(out, "l1_downstream").diameter_max_mm == 450.0);
    CHECK(seg(out, "l2").pressure_max_bar == 12.0);

    testsupport::write_file(tmp.file("bad.txt"),
                            "transmission any diameter_mm 100 200\n");
    CHECK_THROWS_AS(read_default_table(tmp.file("bad.txt")), SchemaError);
}
