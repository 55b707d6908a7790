// End-to-end tests of the gasgraph command line interface. Each case runs
// the real binary against files in a scratch directory and checks exit codes
// and outputs.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gasgraph/gasgraph.hpp"
#include "support/fixtures.hpp"

namespace {

std::string cli_path() { return GASGRAPH_CLI_PATH; }

int run_cli(const std::string& args, const std::string& log = "/dev/null") {
    const std::string cmd = cli_path() + " " + args + " >" + log + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TestCase {
    const char* name;
    std::function<bool()> run;
};

bool expect(bool condition, const std::string& what) {
    if (!condition) std::cerr << "    expectation failed: " << what << '\n';
    return condition;
}

const char* kPlanJson = R"({
  "horizon": [2027, 2030, 2035, 2040],
  "repurpose": [{"segment": "R1", "year": 2027},
                {"segment": "R2", "year": 2040}],
  "new_builds": [],
  "short_pipes": []
})";

const char* kDemandJson = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature",
     "geometry": {"type": "Polygon",
                  "coordinates": [[[14, 47], [15, 47], [15, 48], [14, 48],
                                   [14, 47]]]},
     "properties": {"nuts3": "AT130", "annual_demand": 250.0,
                    "carrier": "hydrogen"}}
  ]})";

bool test_usage_error() {
    return expect(run_cli("--definitely-not-a-flag") == 1, "unknown flag exits 1") &&
           expect(run_cli("") == 1, "missing subcommand exits 1");
}

bool test_ingest_rejects_bad_input() {
    testsupport::TempDir tmp("cli_bad");
    testsupport::write_file(tmp.file("bad.geojson"), R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "LineString",
                      "coordinates": [[14.0, 47.0], [14.2, 47.1]]},
         "properties": {"layer": "segment", "id": "S",
                        "pressure_min_bar": 70, "pressure_max_bar": 20}}
      ]})");
    const int rc = run_cli("ingest --input " + tmp.file("bad.geojson") +
                           " --output " + tmp.file("out.geojson"));
    return expect(rc == 2, "schema violation exits 2");
}

bool test_full_pipeline_and_determinism() {
    testsupport::TempDir tmp("cli_pipe");
    gasgraph::save_dataset(testsupport::fig5_input(), tmp.file("input.geojson"));
    testsupport::write_file(tmp.file("plan.json"), kPlanJson);
    testsupport::write_file(tmp.file("demand.geojson"), kDemandJson);

    const std::string args = "pipeline --input " + tmp.file("input.geojson") +
                             " --plan " + tmp.file("plan.json") + " --demand " +
                             tmp.file("demand.geojson") + " --workdir ";
    if (!expect(run_cli(args + tmp.file("run1")) == 0, "pipeline run 1 exits 0"))
        return false;
    if (!expect(run_cli(args + tmp.file("run2")) == 0, "pipeline run 2 exits 0"))
        return false;

    for (const char* name :
         {"/50_transition.geojson", "/validation_report.json",
          "/export/edges_2040.csv", "/export/nodes_2040.csv",
          "/export/edges_all.csv"}) {
        const std::string a = tmp.file("run1") + name;
        const std::string b = tmp.file("run2") + name;
        if (!expect(testsupport::read_file(a) == testsupport::read_file(b),
                    std::string("byte-identical rerun output ") + name))
            return false;
        if (!expect(!testsupport::read_file(a).empty(),
                    std::string(name) + " is not empty"))
            return false;
    }

    // The transitioned snapshot matches the library route.
    const gasgraph::NetworkDataset via_cli =
        gasgraph::load_dataset(tmp.file("run1") + "/50_transition.geojson");
    gasgraph::NetworkDataset via_lib = testsupport::fig5_transitioned();
    via_lib = gasgraph::assign_regional_demand(
        via_lib, gasgraph::load_demand_specs(tmp.file("demand.geojson")));
    std::string why;
    return expect(testsupport::datasets_equal(via_lib, via_cli, &why),
                  "pipeline output equals library output: " + why);
}

bool test_validate_flags_broken_dataset() {
    testsupport::TempDir tmp("cli_validate");
    gasgraph::NetworkDataset broken = testsupport::fig5_transitioned();
    for (gasgraph::ShortPipe& sp : broken.short_pipes) sp.deactivate_year.reset();
    gasgraph::save_dataset(broken, tmp.file("broken.geojson"));
    const int rc = run_cli("validate --dataset " + tmp.file("broken.geojson") +
                               " --report " + tmp.file("report.json"),
                           tmp.file("validate.log"));
    if (!expect(rc == 3, "validation failure exits 3")) return false;
    const std::string report = testsupport::read_file(tmp.file("report.json"));
    return expect(report.find("\"ok\": false") != std::string::npos,
                  "report records failure") &&
           expect(report.find("decoupling") != std::string::npos,
                  "report names the failing check");
}

bool test_validate_passes_good_dataset() {
    testsupport::TempDir tmp("cli_validate_ok");
    gasgraph::save_dataset(testsupport::fig5_transitioned(),
                           tmp.file("good.geojson"));
    return expect(run_cli("validate --dataset " + tmp.file("good.geojson")) == 0,
                  "valid dataset exits 0");
}

bool test_stats_subcommand() {
    testsupport::TempDir tmp("cli_stats");
    gasgraph::save_dataset(testsupport::fig5_transitioned(),
                           tmp.file("ds.geojson"));
    const int rc = run_cli("stats --dataset " + tmp.file("ds.geojson") +
                               " --year 2040 --json",
                           tmp.file("stats.json"));
    if (!expect(rc == 0, "stats exits 0")) return false;
    const std::string out = testsupport::read_file(tmp.file("stats.json"));
    return expect(out.find("\"year\": 2040") != std::string::npos,
                  "stats reports the requested year") &&
           expect(out.find("hydrogen") != std::string::npos,
                  "stats reports hydrogen buckets");
}

bool test_export_guard_and_force() {
    testsupport::TempDir tmp("cli_export");
    gasgraph::NetworkDataset broken = testsupport::fig5_transitioned();
    for (gasgraph::ShortPipe& sp : broken.short_pipes) sp.deactivate_year.reset();
    gasgraph::save_dataset(broken, tmp.file("broken.geojson"));
    const std::string base = "export --dataset " + tmp.file("broken.geojson") +
                             " --years 2040 --format csv --out " +
                             tmp.file("exp");
    if (!expect(run_cli(base) == 3, "export on invalid data exits 3")) return false;
    return expect(run_cli(base + " --force") == 0, "--force overrides the guard");
}

bool test_georef_subcommand() {
    testsupport::TempDir tmp("cli_georef");
    testsupport::write_file(tmp.file("points.txt"),
                            "0 0 14.0 48.0\n"
                            "1000 0 15.0 48.0\n"
                            "0 1000 14.0 47.0\n");
    testsupport::write_file(tmp.file("trace.geojson"), R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "LineString",
                      "coordinates": [[0, 0], [500, 500], [1000, 1000]]},
         "properties": {"id": "NB1", "commission_year": 2035}}
      ]})");
    const int rc = run_cli("georef --control-points " + tmp.file("points.txt") +
                               " --trace " + tmp.file("trace.geojson") +
                               " --output " + tmp.file("geo.geojson") +
                               " --report " + tmp.file("fit.json"),
                           tmp.file("georef.log"));
    if (!expect(rc == 0, "georef exits 0")) return false;
    const std::string out = testsupport::read_file(tmp.file("geo.geojson"));
    return expect(out.find("14.5") != std::string::npos,
                  "midpoint maps to lon 14.5") &&
           expect(out.find("47.5") != std::string::npos,
                  "midpoint maps to lat 47.5");
}

bool test_env_variable_flags() {
    testsupport::TempDir tmp("cli_env");
    gasgraph::save_dataset(testsupport::fig5_transitioned(),
                           tmp.file("ds.geojson"));
    const std::string cmd = "GASGRAPH_DATASET=" + tmp.file("ds.geojson") + " " +
                            cli_path() + " stats >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return expect(WIFEXITED(rc) && WEXITSTATUS(rc) == 0,
                  "GASGRAPH_DATASET supplies --dataset");
}

}  // namespace

int main() {
    const std::vector<TestCase> cases{
        {"usage errors exit 1", test_usage_error},
        {"ingest rejects schema violations", test_ingest_rejects_bad_input},
        {"full pipeline runs and is deterministic",
         test_full_pipeline_and_determinism},
        {"validate flags a broken dataset", test_validate_flags_broken_dataset},
        {"validate passes a good dataset", test_validate_passes_good_dataset},
        {"stats subcommand", test_stats_subcommand},
        {"export guard and --force", test_export_guard_and_force},
        {"georef subcommand", test_georef_subcommand},
        {"environment variable flags", test_env_variable_flags},
    };

    int failed = 0;
    for (const TestCase& test : cases) {
        const bool ok = test.run();
        std::cout << (ok ? "PASS" : "FAIL") << "  " << test.name << '\n';
        if (!ok) ++failed;
    }
    if (failed) {
        std::cout << failed << " of " << cases.size() << " cli tests failed\n";
        return 1;
    }
    std::cout << "all " << cases.size() << " cli tests passed\n";
    return 0;
}
