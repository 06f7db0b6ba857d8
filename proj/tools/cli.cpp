#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "gridzones/case_io.hpp"
#include "gridzones/errors.hpp"
#include "gridzones/format.hpp"
#include "gridzones/log.hpp"
#include "gridzones/opf.hpp"
#include "gridzones/pipeline.hpp"
#include "gridzones/ptdf.hpp"
#include "gridzones/scenarios.hpp"

namespace gridzones::cli {

namespace {

namespace fs = std::filesystem;

// JSON config files carry the same keys as the long flags; nested objects
// map to dotted section names.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = opt->get_lnames().front();
            auto results = opt->results();
            if (results.empty() && default_also && !opt->get_default_str().empty())
                results.push_back(opt->get_default_str());
            if (results.size() == 1)
                doc[name] = results.front();
            else if (!results.empty())
                doc[name] = results;
        }
        return doc.dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(input);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!doc.is_object()) throw CLI::ConversionError("config: top level must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto path = parents;
                path.push_back(key);
                collect(value, path, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(value));
            items.push_back(std::move(item));
        }
    }
};

struct RunConfig {
    std::string case_path;
    bool no_limits = false;
    int reference_bus = 0;
    bool generalized = false;
    std::string output;

    int count = 100;
    std::uint64_t seed = 1;
    std::string scenarios_csv;
    WindModel wind;
    bool shared_wind = false;

    PipelineConfig pipeline;
    std::string out_dir = ".";
    std::vector<std::string> formats{"json", "csv", "dot"};
    std::string log_level = "warn";
};

std::optional<std::string> config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].starts_with("--config=")) return args[i].substr(9);
    }
    return std::nullopt;
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << text;
    logger()->info("wrote {}", path.string());
}

ScenarioSet load_scenarios(const RunConfig& cfg, const Network& network) {
    if (!cfg.scenarios_csv.empty()) return load_scenarios_csv(cfg.scenarios_csv, network);
    if (cfg.count < 1) throw ConfigError("scenario count must be at least 1");
    WindModel wind = cfg.wind;
    wind.correlation = cfg.shared_wind ? WindCorrelation::shared : WindCorrelation::independent;
    return monte_carlo_scenarios(network, cfg.count, cfg.seed, wind);
}

bool wants(const RunConfig& cfg, const std::string& format) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

int infeasibility_code(const WelfareReport& report) {
    const int total = report.servable_scenarios + report.unservable_scenarios;
    if (2 * report.unservable_scenarios > total) {
        logger()->warn("{} of {} scenarios unservable", report.unservable_scenarios, total);
        return infeasible;
    }
    return ok;
}

int run_opf(const RunConfig& cfg, std::ostream& out) {
    const Network network = load_case_file(cfg.case_path);
    OpfOptions options;
    options.enforce_limits = !cfg.no_limits;
    options.tol = cfg.pipeline.welfare.tol;
    const DispatchSolution sol = dc_opf(network, options);
    write_text(dispatch_to_json(sol), cfg.output, out);
    if (!sol.feasible) {
        logger()->error("dispatch infeasible: {}", sol.diagnostic);
        return infeasible;
    }
    return ok;
}

int run_ptdf(const RunConfig& cfg, std::ostream& out) {
    const Network network = load_case_file(cfg.case_path);
    const auto n = static_cast<int>(network.num_buses());
    if (cfg.reference_bus < 0 || cfg.reference_bus >= n)
        throw ConfigError(fmt::format("reference bus must lie in 0..{}", n - 1));
    const PtdfMatrix h = ptdf_matrix(network, cfg.reference_bus);
    const Eigen::MatrixXd& values = cfg.generalized ? generalized_ptdf(h, network).values : h.values;
    write_text(ptdf_to_csv(values, network), cfg.output, out);
    return ok;
}

int run_scenarios(const RunConfig& cfg, std::ostream& out) {
    const Network network = load_case_file(cfg.case_path);
    RunConfig generated = cfg;
    generated.scenarios_csv.clear();
    write_text(scenarios_to_csv(load_scenarios(generated, network), network), cfg.output, out);
    return ok;
}

int run_zones(const std::string& which, const RunConfig& cfg, std::ostream& out) {
    const Network network = load_case_file(cfg.case_path);
    const ScenarioSet scenarios = load_scenarios(cfg, network);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    auto emit = [&](const MethodResult& r, const std::string& stem) {
        if (wants(cfg, "dot")) write_file(dir / (stem + ".dot"), partition_to_dot(r.recommended, network, stem));
    };

    if (which == "compare") {
        const Comparison c = compare_methods(network, scenarios, cfg.pipeline);
        if (wants(cfg, "json")) write_file(dir / "comparison.json", comparison_to_json(c) + "\n");
        if (wants(cfg, "csv"))
            write_file(dir / "report.csv", welfare_report_to_csv(c.lmp.report, to_string(c.lmp.method)) +
                                               welfare_report_to_csv(c.ptdf.report, to_string(c.ptdf.method), false));
        emit(c.lmp, "lmp");
        emit(c.ptdf, "ptdf");
        out << comparison_to_text(c);
        return infeasibility_code(c.lmp.report);
    }

    const bool lmp = which == "lmp";
    const MethodResult r = lmp ? lmp_pipeline(network, scenarios, cfg.pipeline)
                               : sequential_partition(network, scenarios, cfg.pipeline);
    const std::string stem = lmp ? "lmp" : "ptdf";
    if (wants(cfg, "json")) write_file(dir / (stem + ".json"), method_result_to_json(r) + "\n");
    if (wants(cfg, "csv")) write_file(dir / "report.csv", welfare_report_to_csv(r.report, to_string(r.method)));
    emit(r, stem);
    out << fmt::format("{}: k = {}, mean total = {}\n", to_string(r.method), r.recommended.k,
                       format_number(r.recommended_total));
    return infeasibility_code(r.report);
}

void add_options(CLI::App& app, RunConfig& cfg) {
    app.option_defaults()->always_capture_default();
    app.add_option("--case", cfg.case_path, "Network case file (MATPOWER .m or JSON)")->check(CLI::ExistingFile);
    app.add_flag("--no-limits", cfg.no_limits, "Ignore branch flow limits (opf run)");
    app.add_option("--reference-bus", cfg.reference_bus, "Reference bus index for the PTDF (ptdf dump)");
    app.add_flag("--generalized", cfg.generalized, "Dump the generalized PTDF (ptdf dump)");
    app.add_option("-o,--output", cfg.output, "Output file; standard output when omitted");

    app.add_option("--count,--gen-scenarios", cfg.count, "Number of generated wind scenarios");
    app.add_option("--seed", cfg.seed, "Scenario generator seed");
    app.add_option("--scenarios-csv", cfg.scenarios_csv, "Read scenarios from CSV instead of generating")
        ->check(CLI::ExistingFile);
    app.add_option("--weibull-shape", cfg.wind.weibull_shape);
    app.add_option("--weibull-scale", cfg.wind.weibull_scale, "m/s");
    app.add_option("--cut-in", cfg.wind.cut_in, "m/s");
    app.add_option("--rated-speed", cfg.wind.rated, "m/s");
    app.add_option("--cut-out", cfg.wind.cut_out, "m/s");
    app.add_flag("--shared-wind", cfg.shared_wind, "One wind speed per scenario for every farm");

    auto& p = cfg.pipeline;
    app.add_option("--max-k", p.max_k, "Largest number of zones");
    app.add_option("--k-scenario", p.k_scenario, "Per-scenario Ward cut (0 = max-k)");
    app.add_option("--tol-welfare", p.tol_welfare, "Saving a split must exceed (currency/h)");
    app.add_option("--frequency-floor", p.frequency_floor, "Skip lines congested less often");
    app.add_flag("--revisit-rejected", p.revisit_rejected, "One extra pass over rejected lines");
    app.add_option("--tol-binding", p.welfare.tol.binding);
    app.add_option("--tol-dual", p.welfare.tol.dual);
    app.add_option("--tol-running", p.welfare.tol.running);
    app.add_option("--infeasible-penalty", p.welfare.infeasible_penalty, "Cost per infeasible zone sub-problem");
    app.add_option("-j,--threads", p.welfare.threads, "Worker threads")->check(CLI::PositiveNumber);

    app.add_option("--out-dir", cfg.out_dir, "Directory for zones outputs");
    app.add_option("--formats", cfg.formats, "Subset of json,csv,dot")
        ->delimiter(',')
        ->check(CLI::IsMember({"json", "csv", "dot"}));
    app.add_option("--log-level", cfg.log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Electricity network zoning: LMP consensus clustering and PTDF-based splitting", "gridzones"};
    app.require_subcommand(1);
    RunConfig cfg;
    add_options(app, cfg);
    app.set_config("--config", "", "TOML or JSON config file with the same keys as the long flags");
    if (auto path = config_path(args); path && fs::path(*path).extension() == ".json")
        app.config_formatter(std::make_shared<JsonConfig>());

    auto* opf = app.add_subcommand("opf", "Single DC optimal power flow")->require_subcommand(1)->fallthrough();
    auto* opf_run = opf->add_subcommand("run", "Solve and print the dispatch as JSON")->fallthrough();
    auto* ptdf = app.add_subcommand("ptdf", "Distribution factors")->require_subcommand(1)->fallthrough();
    auto* ptdf_dump = ptdf->add_subcommand("dump", "Write H (or S with --generalized) as CSV")->fallthrough();
    auto* scen = app.add_subcommand("scenario", "Wind scenarios")->require_subcommand(1)->fallthrough();
    auto* scen_gen = scen->add_subcommand("gen", "Generate Monte Carlo scenarios as CSV")->fallthrough();
    auto* zones = app.add_subcommand("zones", "Zone divisions")->require_subcommand(1)->fallthrough();
    auto* zones_lmp = zones->add_subcommand("lmp", "LMP consensus clustering")->fallthrough();
    auto* zones_ptdf = zones->add_subcommand("ptdf", "Sequential PTDF-sign splitting")->fallthrough();
    auto* zones_cmp = zones->add_subcommand("compare", "Both methods and the welfare comparison")->fallthrough();
    for (auto* sub : {opf_run, ptdf_dump, scen_gen, zones_lmp, zones_ptdf, zones_cmp})
        sub->footer("Options are shared by every command; run `gridzones --help` for the full list.");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return usage_error;
    }

    logger()->set_level(spdlog::level::from_str(cfg.log_level));
    try {
        if (cfg.case_path.empty()) throw ConfigError("--case is required");
        if (opf_run->parsed()) return run_opf(cfg, out);
        if (ptdf_dump->parsed()) return run_ptdf(cfg, out);
        if (scen_gen->parsed()) return run_scenarios(cfg, out);
        if (zones_lmp->parsed()) return run_zones("lmp", cfg, out);
        if (zones_ptdf->parsed()) return run_zones("ptdf", cfg, out);
        if (zones_cmp->parsed()) return run_zones("compare", cfg, out);
        err << app.help();
        return usage_error;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return infeasible;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return usage_error;
    } catch (const ValidationError& e) {
        err << "validation error:\n";
        for (const auto& v : e.violations()) err << "  " << v << '\n';
        return usage_error;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    }
}

}  // namespace gridzones::cli
