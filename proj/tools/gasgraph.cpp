// gasgraph — builds, enriches, transforms and validates a time-dependent
// natural gas / hydrogen pipeline network dataset from GeoJSON layers.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 validation failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gasgraph/gasgraph.hpp"

namespace fs = std::filesystem;
using gasgraph::NetworkDataset;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitValidation = 3;

std::vector<int> parse_years(const std::string& list) {
    std::vector<int> years;
    std::string token;
    std::istringstream in(list);
    while (std::getline(in, token, ',')) {
        std::istringstream t(token);
        int y;
        if (t >> y) years.push_back(y);
        else if (!token.empty())
            throw gasgraph::DataError("cannot parse year '" + token + "'");
    }
    return years;
}

std::vector<std::string> read_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gasgraph::IoError("cannot read '" + path + "'");
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream t(line);
        std::string entry;
        while (t >> entry) entries.push_back(entry);
    }
    return entries;
}

void write_json_file(const nlohmann::ordered_json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gasgraph::IoError("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

struct IngestArgs {
    std::string input;
    std::string output;
    double snap_tol_m = 100.0;
};

int run_ingest(const IngestArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.input);
    auto result = gasgraph::snap_and_build(ds, a.snap_tol_m);
    gasgraph::save_dataset(result.dataset, a.output);
    std::cout << "ingested " << result.dataset.segments.size() << " segments, "
              << result.dataset.nodes.size() << " nodes -> " << a.output << '\n';
    return kExitOk;
}

struct GeorefArgs {
    std::string control_points;
    std::string trace;
    std::string output;
    std::string report;
};

// Transforms every Point/LineString coordinate in the trace file from image
// space to geographic space. Properties pass through untouched.
int run_georef(const GeorefArgs& a) {
    const auto pairs = gasgraph::read_control_points(a.control_points);
    const gasgraph::AffineFit fit = gasgraph::estimate_affine(pairs);
    std::cout << "affine fit from " << pairs.size()
              << " control points: max residual " << fit.residuals.max_m
              << " m, rms " << fit.residuals.rms_m << " m\n";

    std::ifstream in(a.trace);
    if (!in) throw gasgraph::IoError("cannot read '" + a.trace + "'");
    nlohmann::ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw gasgraph::SchemaError("'" + a.trace + "' is not valid JSON: " +
                                    e.what());
    }

    auto transform_pair = [&fit](nlohmann::ordered_json& c) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
            throw gasgraph::SchemaError("malformed coordinates in trace file");
        const gasgraph::GeoPoint g = fit.transform.apply(
            gasgraph::PixelPoint{c[0].get<double>(), c[1].get<double>()});
        if (!gasgraph::point_in_bounds(g))
            throw gasgraph::DataError("transformed trace vertex falls outside "
                                      "WGS84 bounds");
        c = nlohmann::ordered_json::array({g.lon, g.lat});
    };

    for (auto& f : doc["features"]) {
        if (!f.contains("geometry") || !f["geometry"].is_object()) continue;
        auto& geom = f["geometry"];
        const std::string type = geom.value("type", "");
        if (type == "Point") {
            transform_pair(geom["coordinates"]);
        } else if (type == "LineString") {
            for (auto& c : geom["coordinates"]) transform_pair(c);
        } else {
            throw gasgraph::SchemaError("trace features must be Point or "
                                        "LineString, got '" + type + "'");
        }
    }

    write_json_file(doc, a.output);
    if (!a.report.empty()) {
        nlohmann::ordered_json rep;
        rep["pairs"] = pairs.size();
        rep["max_residual_m"] = fit.residuals.max_m;
        rep["rms_residual_m"] = fit.residuals.rms_m;
        rep["residuals_m"] = fit.residuals.meters;
        nlohmann::ordered_json coef;
        coef["a"] = fit.transform.a;
        coef["b"] = fit.transform.b;
        coef["c"] = fit.transform.c;
        coef["d"] = fit.transform.d;
        coef["e"] = fit.transform.e;
        coef["f"] = fit.transform.f;
        rep["transform"] = std::move(coef);
        write_json_file(rep, a.report);
    }
    std::cout << "georeferenced traces -> " << a.output << '\n';
    return kExitOk;
}

struct MatchArgs {
    std::string dataset;
    std::string reference;
    std::string field_map;
    std::string fields = "name,diameter_min_mm,diameter_max_mm,"
                         "pressure_min_bar,pressure_max_bar";
    std::string output;
    std::string report;
    double buffer_m = 200.0;
    double step_m = 25.0;
};

int run_match(const MatchArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.dataset);
    const gasgraph::FieldMap map = a.field_map.empty()
                                       ? gasgraph::default_field_map()
                                       : gasgraph::read_field_map(a.field_map);
    const auto reference = gasgraph::load_reference(a.reference, map);

    std::vector<std::string> fields;
    std::istringstream in(a.fields);
    std::string token;
    while (std::getline(in, token, ','))
        if (!token.empty()) fields.push_back(token);

    gasgraph::MatchParams params;
    params.buffer_m = a.buffer_m;
    params.step_m = a.step_m;
    auto results = gasgraph::match_all(ds, reference, params);
    ds = gasgraph::assign_attributes(ds, results, fields);
    gasgraph::save_dataset(ds, a.output);

    std::size_t matched = 0;
    for (const auto& r : results)
        if (r.chosen) ++matched;
    std::cout << "matched " << matched << "/" << results.size()
              << " segments against " << reference.size() << " reference features\n";
    if (!a.report.empty())
        write_json_file(gasgraph::match_report_json(results), a.report);
    return kExitOk;
}

struct DefaultsArgs {
    std::string dataset;
    std::string table;
    std::string output;
};

int run_defaults(const DefaultsArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.dataset);
    const auto table = a.table.empty() ? gasgraph::builtin_default_table()
                                       : gasgraph::read_default_table(a.table);
    const gasgraph::Graph graph = gasgraph::build_graph(ds);
    ds = gasgraph::apply_distribution_defaults(ds, graph, table);
    gasgraph::save_dataset(ds, a.output);
    std::cout << "applied distribution defaults -> " << a.output << '\n';
    return kExitOk;
}

struct TransitionArgs {
    std::string dataset;
    std::string plan;
    std::string demand;
    std::string output;
    double snap_tol_m = 100.0;
};

int run_transition(const TransitionArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.dataset);
    const gasgraph::TransitionPlan plan = gasgraph::load_transition_plan(a.plan);
    std::vector<gasgraph::RegionDemandSpec> specs;
    if (!a.demand.empty()) specs = gasgraph::load_demand_specs(a.demand);
    ds = gasgraph::apply_transition(ds, plan, specs, a.snap_tol_m);
    gasgraph::save_dataset(ds, a.output);
    std::cout << "applied transition plan: " << plan.repurpose.size()
              << " repurposed, " << plan.new_builds.size() << " new builds -> "
              << a.output << '\n';
    return kExitOk;
}

struct ValidateArgs {
    std::string dataset;
    std::string years;
    std::string exceptions;
    std::string report;
};

int run_validate(const ValidateArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.dataset);
    std::vector<int> years = a.years.empty()
                                 ? gasgraph::default_validation_years(ds)
                                 : parse_years(a.years);
    if (years.empty())
        throw gasgraph::DataError(
            "no validation years: pass --years or set a horizon in the dataset");
    std::vector<std::string> extra;
    if (!a.exceptions.empty()) extra = read_list_file(a.exceptions);
    const auto violations = gasgraph::run_validation(ds, years, extra);
    std::cout << gasgraph::format_validation_text(violations, years);
    if (!a.report.empty())
        write_json_file(gasgraph::validation_report_json(violations, years),
                        a.report);
    return violations.empty() ? kExitOk : kExitValidation;
}

struct StatsArgs {
    std::string dataset;
    std::optional<int> year;
    bool as_json = false;
};

int run_stats(const StatsArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.dataset);
    const gasgraph::StatsReport report =
        a.year ? gasgraph::compute_stats_at(ds, *a.year)
               : gasgraph::compute_stats(ds);
    if (a.as_json)
        std::cout << gasgraph::stats_to_json(report).dump(2) << '\n';
    else
        std::cout << gasgraph::format_stats(report);
    return kExitOk;
}

struct ExportArgs {
    std::string dataset;
    std::string years;
    std::string format = "csv";
    std::string out_dir;
    std::string exceptions;
    bool force = false;
};

int run_export(const ExportArgs& a) {
    NetworkDataset ds = gasgraph::load_dataset(a.dataset);
    std::vector<int> years = a.years.empty()
                                 ? gasgraph::default_validation_years(ds)
                                 : parse_years(a.years);
    if (years.empty())
        throw gasgraph::DataError(
            "no export years: pass --years or set a horizon in the dataset");
    std::vector<std::string> extra;
    if (!a.exceptions.empty()) extra = read_list_file(a.exceptions);
    const auto violations = gasgraph::run_validation(ds, years, extra);
    if (!violations.empty()) {
        if (!a.force) {
            std::cerr << gasgraph::format_validation_text(violations, years);
            std::cerr << "export refused: dataset fails validation "
                         "(use --force to override)\n";
            return kExitValidation;
        }
        std::cerr << "warning: exporting despite " << violations.size()
                  << " validation violation(s)\n";
    }
    gasgraph::export_tables(ds, years, a.out_dir, a.format);
    std::cout << "exported " << years.size() << " year(s) as " << a.format
              << " -> " << a.out_dir << '\n';
    return kExitOk;
}

struct PipelineArgs {
    IngestArgs ingest;
    GeorefArgs georef;
    MatchArgs match;
    DefaultsArgs defaults;
    TransitionArgs transition;
    ValidateArgs validate;
    ExportArgs exp;
    std::string workdir = "gasgraph_work";
};

// Runs the stages in their fixed order, writing a snapshot after each one so
// any prefix of the pipeline can be resumed or inspected.
int run_pipeline(PipelineArgs a) {
    fs::create_directories(a.workdir);
    const auto stage_path = [&a](const char* name) {
        return (fs::path(a.workdir) / name).string();
    };

    std::string current = stage_path("10_ingested.geojson");
    {
        a.ingest.output = current;
        run_ingest(a.ingest);
    }

    std::string traces_geo;
    if (!a.georef.trace.empty()) {
        if (a.georef.control_points.empty())
            throw gasgraph::DataError("georef stage needs --control-points");
        a.georef.output = stage_path("20_traces.geojson");
        run_georef(a.georef);
        traces_geo = a.georef.output;
    }

    if (!a.match.reference.empty()) {
        a.match.dataset = current;
        a.match.output = stage_path("30_matched.geojson");
        a.match.report = stage_path("30_match_report.json");
        run_match(a.match);
        current = a.match.output;
    }

    {
        a.defaults.dataset = current;
        a.defaults.output = stage_path("40_defaults.geojson");
        run_defaults(a.defaults);
        current = a.defaults.output;
    }

    if (!a.transition.plan.empty() || !traces_geo.empty()) {
        NetworkDataset ds = gasgraph::load_dataset(current);
        gasgraph::TransitionPlan plan;
        if (!a.transition.plan.empty())
            plan = gasgraph::load_transition_plan(a.transition.plan);
        if (!traces_geo.empty()) {
            // Georeferenced traces become new builds; they must carry id and
            // commission_year properties.
            std::ifstream in(traces_geo);
            nlohmann::json doc;
            in >> doc;
            for (const auto& f : doc.value("features", nlohmann::json::array()))
                plan.new_builds.push_back(gasgraph::parse_new_build_feature(f));
        }
        std::vector<gasgraph::RegionDemandSpec> specs;
        if (!a.transition.demand.empty())
            specs = gasgraph::load_demand_specs(a.transition.demand);
        ds = gasgraph::apply_transition(ds, plan, specs, a.transition.snap_tol_m);
        current = stage_path("50_transition.geojson");
        gasgraph::save_dataset(ds, current);
        std::cout << "applied transition plan -> " << current << '\n';
    }

    {
        a.validate.dataset = current;
        a.validate.report = stage_path("validation_report.json");
        if (const int rc = run_validate(a.validate); rc != kExitOk) {
            std::cerr << "stage validate: dataset failed validation\n";
            return rc;
        }
    }

    {
        a.exp.dataset = current;
        if (a.exp.out_dir.empty()) a.exp.out_dir = stage_path("export");
        a.exp.years = a.validate.years;
        a.exp.exceptions = a.validate.exceptions;
        if (const int rc = run_export(a.exp); rc != kExitOk) {
            std::cerr << "stage export failed\n";
            return rc;
        }
    }

    std::cout << "pipeline finished; final dataset: " << current << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gasgraph: time-dependent gas/hydrogen network dataset toolkit"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand(
        "ingest", "Load, validate and snap a GeoJSON dataset");
    ingest->add_option("--input", ingest_args.input, "input GeoJSON dataset")
        ->required()
        ->envname("GASGRAPH_INPUT");
    ingest->add_option("--snap-tol-m", ingest_args.snap_tol_m,
                       "endpoint snap tolerance in meters")
        ->envname("GASGRAPH_SNAP_TOL_M");
    ingest->add_option("--output,-o", ingest_args.output, "output dataset path")
        ->required()
        ->envname("GASGRAPH_OUTPUT");

    GeorefArgs georef_args;
    auto* georef = app.add_subcommand(
        "georef", "Fit an affine transform from control points and transform "
                  "image-space traces");
    georef->add_option("--control-points", georef_args.control_points,
                       "control point file: lines of 'x y lon lat'")
        ->required()
        ->envname("GASGRAPH_CONTROL_POINTS");
    georef->add_option("--trace", georef_args.trace,
                       "GeoJSON traces in image coordinates")
        ->required()
        ->envname("GASGRAPH_TRACE");
    georef->add_option("--output,-o", georef_args.output,
                       "georeferenced trace output")
        ->required()
        ->envname("GASGRAPH_OUTPUT");
    georef->add_option("--report", georef_args.report,
                       "write fit residual report (JSON)")
        ->envname("GASGRAPH_REPORT");

    MatchArgs match_args;
    auto* match = app.add_subcommand(
        "match", "Assign attributes by buffer-based conflation against a "
                 "reference dataset");
    match->add_option("--dataset", match_args.dataset, "input dataset")
        ->required()
        ->envname("GASGRAPH_DATASET");
    match->add_option("--reference", match_args.reference,
                      "reference GeoJSON LineString collection")
        ->required()
        ->envname("GASGRAPH_REFERENCE");
    match->add_option("--buffer-m", match_args.buffer_m, "buffer width in meters")
        ->envname("GASGRAPH_BUFFER_M");
    match->add_option("--sample-step-m", match_args.step_m,
                      "sampling step along the target in meters")
        ->envname("GASGRAPH_SAMPLE_STEP_M");
    match->add_option("--field-map", match_args.field_map,
                      "field mapping file: 'source_property target_field'")
        ->envname("GASGRAPH_FIELD_MAP");
    match->add_option("--fields", match_args.fields,
                      "comma-separated target fields to assign")
        ->envname("GASGRAPH_FIELDS");
    match->add_option("--output,-o", match_args.output, "output dataset path")
        ->required()
        ->envname("GASGRAPH_OUTPUT");
    match->add_option("--report", match_args.report,
                      "write match provenance report (JSON)")
        ->envname("GASGRAPH_REPORT");

    DefaultsArgs defaults_args;
    auto* defaults = app.add_subcommand(
        "defaults", "Fill unset distribution-level attributes with "
                    "conservative ranges");
    defaults->add_option("--dataset", defaults_args.dataset, "input dataset")
        ->required()
        ->envname("GASGRAPH_DATASET");
    defaults->add_option("--table", defaults_args.table,
                         "override table: 'category connectivity field min max'")
        ->envname("GASGRAPH_TABLE");
    defaults->add_option("--output,-o", defaults_args.output, "output dataset path")
        ->required()
        ->envname("GASGRAPH_OUTPUT");

    TransitionArgs transition_args;
    auto* transition = app.add_subcommand(
        "transition", "Apply a hydrogen transition plan (repurposing, new "
                      "builds, node splitting, short pipes, demand)");
    transition->add_option("--dataset", transition_args.dataset, "input dataset")
        ->required()
        ->envname("GASGRAPH_DATASET");
    transition->add_option("--plan", transition_args.plan, "transition plan (JSON)")
        ->required()
        ->envname("GASGRAPH_PLAN");
    transition->add_option("--demand", transition_args.demand,
                           "regional demand polygons (GeoJSON)")
        ->envname("GASGRAPH_DEMAND");
    transition->add_option("--snap-tol-m", transition_args.snap_tol_m,
                           "snap tolerance for new builds in meters")
        ->envname("GASGRAPH_SNAP_TOL_M");
    transition->add_option("--output,-o", transition_args.output,
                           "output dataset path")
        ->required()
        ->envname("GASGRAPH_OUTPUT");

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand(
        "validate", "Check carrier decoupling and supply connectivity per year");
    validate->add_option("--dataset", validate_args.dataset, "input dataset")
        ->required()
        ->envname("GASGRAPH_DATASET");
    validate->add_option("--years", validate_args.years,
                         "comma-separated years (default: horizon and the "
                         "years before each stage)")
        ->envname("GASGRAPH_YEARS");
    validate->add_option("--exceptions", validate_args.exceptions,
                         "file of region codes or node ids exempt from the "
                         "supply check")
        ->envname("GASGRAPH_EXCEPTIONS");
    validate->add_option("--report", validate_args.report,
                         "write violation report (JSON)")
        ->envname("GASGRAPH_REPORT");

    StatsArgs stats_args;
    int stats_year = INT32_MIN;
    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    stats->add_option("--dataset", stats_args.dataset, "input dataset")
        ->required()
        ->envname("GASGRAPH_DATASET");
    stats->add_option("--year", stats_year,
                      "report the active network at this year")
        ->envname("GASGRAPH_YEAR");
    stats->add_flag("--json", stats_args.as_json, "machine-readable output");

    ExportArgs export_args;
    auto* exp = app.add_subcommand("export", "Write ESOM-ready tables");
    exp->add_option("--dataset", export_args.dataset, "input dataset")
        ->required()
        ->envname("GASGRAPH_DATASET");
    exp->add_option("--years", export_args.years, "comma-separated years")
        ->envname("GASGRAPH_YEARS");
    exp->add_option("--format", export_args.format, "csv or geojson")
        ->envname("GASGRAPH_FORMAT");
    exp->add_option("--out", export_args.out_dir, "output directory")
        ->required()
        ->envname("GASGRAPH_OUT");
    exp->add_option("--exceptions", export_args.exceptions,
                    "supply-check exception file")
        ->envname("GASGRAPH_EXCEPTIONS");
    exp->add_flag("--force", export_args.force,
                  "export even when validation fails");

    PipelineArgs pipeline_args;
    auto* pipeline = app.add_subcommand(
        "pipeline", "Run ingest, georef, match, defaults, transition, "
                    "validate and export in order");
    pipeline->add_option("--input", pipeline_args.ingest.input,
                         "input GeoJSON dataset")
        ->required()
        ->envname("GASGRAPH_INPUT");
    pipeline->add_option("--workdir", pipeline_args.workdir,
                         "directory for stage snapshots")
        ->envname("GASGRAPH_WORKDIR");
    pipeline->add_option("--snap-tol-m", pipeline_args.ingest.snap_tol_m,
                         "endpoint snap tolerance in meters")
        ->envname("GASGRAPH_SNAP_TOL_M");
    pipeline->add_option("--control-points", pipeline_args.georef.control_points,
                         "control point file for the georef stage");
    pipeline->add_option("--trace", pipeline_args.georef.trace,
                         "image-space traces; georeferenced and added as new "
                         "builds");
    pipeline->add_option("--reference", pipeline_args.match.reference,
                         "reference dataset for the match stage");
    pipeline->add_option("--field-map", pipeline_args.match.field_map,
                         "field mapping file for the match stage");
    pipeline->add_option("--buffer-m", pipeline_args.match.buffer_m,
                         "match buffer in meters");
    pipeline->add_option("--sample-step-m", pipeline_args.match.step_m,
                         "match sampling step in meters");
    pipeline->add_option("--defaults-table", pipeline_args.defaults.table,
                         "override defaults table");
    pipeline->add_option("--plan", pipeline_args.transition.plan,
                         "transition plan (JSON)");
    pipeline->add_option("--demand", pipeline_args.transition.demand,
                         "regional demand polygons (GeoJSON)");
    pipeline->add_option("--years", pipeline_args.validate.years,
                         "validation/export years");
    pipeline->add_option("--exceptions", pipeline_args.validate.exceptions,
                         "supply-check exception file");
    pipeline->add_option("--export-format", pipeline_args.exp.format,
                         "csv or geojson");
    pipeline->add_option("--export-dir", pipeline_args.exp.out_dir,
                         "export directory (default <workdir>/export)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest) return run_ingest(ingest_args);
        if (*georef) return run_georef(georef_args);
        if (*match) return run_match(match_args);
        if (*defaults) return run_defaults(defaults_args);
        if (*transition) return run_transition(transition_args);
        if (*validate) return run_validate(validate_args);
        if (*stats) {
            if (stats_year != INT32_MIN) stats_args.year = stats_year;
            return run_stats(stats_args);
        }
        if (*exp) return run_export(export_args);
        if (*pipeline) {
            pipeline_args.transition.snap_tol_m = pipeline_args.ingest.snap_tol_m;
            return run_pipeline(pipeline_args);
        }
    } catch (const gasgraph::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
