#include "gridzones/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridzones/errors.hpp"
#include "gridzones/format.hpp"
#include "gridzones/log.hpp"
#include "gridzones/parallel.hpp"

namespace gridzones {

namespace {

void check_config(const PipelineConfig& config, const Network& network) {
    const int n = static_cast<int>(network.num_buses());
    if (config.max_k < 1 || config.max_k > n)
        throw ConfigError(fmt::format("max_k must lie in 1..{} (got {})", n, config.max_k));
    if (config.k_scenario < 0) throw ConfigError("k_scenario must be non-negative");
    if (config.tol_welfare < 0.0) throw ConfigError("tol_welfare must be non-negative");
    if (config.frequency_floor < 0.0 || config.frequency_floor > 1.0)
        throw ConfigError("frequency_floor must lie in [0, 1]");
    if (config.welfare.threads < 1) throw ConfigError("threads must be at least 1");
}

/// Fully constrained dispatch per scenario; empty for unservable scenarios.
std::vector<std::optional<DispatchSolution>> scenario_dispatches(const Network& network,
                                                                 const ScenarioSet& scenarios,
                                                                 const PipelineConfig& config) {
    std::vector<std::optional<DispatchSolution>> out(scenarios.size());
    parallel_for(scenarios.size(), config.welfare.threads, [&](std::size_t s) {
        try {
            const Network applied = apply_scenario(network, scenarios.scenarios[s]);
            OpfOptions options;
            options.tol = config.welfare.tol;
            DispatchSolution sol = dc_opf(applied, options);
            if (sol.feasible) out[s] = std::move(sol);
        } catch (const InfeasibleError&) {
        }
    });
    return out;
}

std::vector<LineFrequency> frequencies(const std::vector<std::optional<DispatchSolution>>& dispatches,
                                       std::size_t num_scenarios) {
    std::map<int, int> count;
    for (const auto& d : dispatches)
        if (d)
            for (int l : d->binding_lines) ++count[l];
    std::vector<LineFrequency> out;
    for (auto [line, c] : count)
        out.push_back({line, static_cast<double>(c) / static_cast<double>(num_scenarios)});
    std::stable_sort(out.begin(), out.end(),
                     [](const LineFrequency& a, const LineFrequency& b) { return a.frequency > b.frequency; });
    return out;
}

void fill_diagnostics(MethodResult& result, const std::vector<std::optional<DispatchSolution>>& dispatches,
                      std::size_t num_scenarios) {
    result.congested_per_scenario.clear();
    result.skipped_scenarios = 0;
    for (const auto& d : dispatches) {
        result.congested_per_scenario.push_back(d ? d->binding_lines : std::vector<int>{});
        if (!d) ++result.skipped_scenarios;
    }
    result.line_frequencies = frequencies(dispatches, num_scenarios);
}

void finish(MethodResult& result, WelfareEvaluator& evaluator) {
    result.report = evaluate_divisions(evaluator, result.candidates);
    result.recommended = result.report.best_candidate().partition;
    result.recommended_total = result.report.best_candidate().mean.total;
}

nlohmann::ordered_json partition_json(const Partition& p) {
    nlohmann::ordered_json j;
    j["k"] = p.k;
    j["zone_of"] = p.zone_of;
    return j;
}

nlohmann::ordered_json result_json(const MethodResult& r) {
    nlohmann::ordered_json doc;
    doc["method"] = to_string(r.method);
    doc["recommended"] = partition_json(r.recommended);
    doc["recommended_total"] = round12(r.recommended_total);
    doc["report"] = nlohmann::ordered_json::parse(welfare_report_to_json(r.report));

    auto& diag = doc["diagnostics"];
    diag["skipped_scenarios"] = r.skipped_scenarios;
    auto& freq = diag["line_frequencies"] = nlohmann::ordered_json::array();
    for (const auto& f : r.line_frequencies)
        freq.push_back({{"branch", f.branch}, {"frequency", round12(f.frequency)}});
    diag["congested_per_scenario"] = r.congested_per_scenario;
    auto& steps = diag["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : r.steps) {
        nlohmann::ordered_json j;
        j["line"] = s.line;
        j["accepted"] = s.accepted;
        j["incumbent_total"] = round12(s.incumbent_total);
        if (s.tentative) {
            j["tentative_total"] = round12(s.tentative_total);
            j["tentative"] = partition_json(*s.tentative);
        } else {
            j["tentative_total"] = nullptr;
            j["tentative"] = nullptr;
        }
        j["note"] = s.note;
        steps.push_back(std::move(j));
    }
    auto& totals = diag["accepted_totals"] = nlohmann::ordered_json::array();
    for (double t : r.accepted_totals) totals.push_back(round12(t));
    return doc;
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::lmp_consensus: return "lmp_consensus";
        case Method::congestion_contribution: return "congestion_contribution";
    }
    return "unknown";
}

MethodResult lmp_pipeline(const Network& network, const ScenarioSet& scenarios, const PipelineConfig& config) {
    check_config(config, network);
    const int n = static_cast<int>(network.num_buses());
    const int k_scenario = config.k_scenario > 0 ? std::min(config.k_scenario, n) : config.max_k;

    MethodResult result;
    result.method = Method::lmp_consensus;
    const auto dispatches = scenario_dispatches(network, scenarios, config);
    fill_diagnostics(result, dispatches, scenarios.size());

    std::vector<std::optional<Partition>> clustered(dispatches.size());
    parallel_for(dispatches.size(), config.welfare.threads, [&](std::size_t s) {
        if (dispatches[s]) clustered[s] = ward_connectivity_cluster(dispatches[s]->nodal_prices, network, k_scenario);
    });
    std::vector<Partition> partitions;
    for (auto& p : clustered)
        if (p) partitions.push_back(std::move(*p));
    if (partitions.empty()) throw InfeasibleError("every scenario is unservable");
    logger()->info("lmp: {} scenario partitions, {} skipped", partitions.size(), result.skipped_scenarios);

    result.candidates = consensus_cluster(partitions, network, config.max_k);
    WelfareEvaluator evaluator(network, scenarios, config.welfare);
    finish(result, evaluator);
    return result;
}

std::vector<LineFrequency> congestion_frequency(const Network& network, const ScenarioSet& scenarios,
                                                const PipelineConfig& config) {
    return frequencies(scenario_dispatches(network, scenarios, config), scenarios.size());
}

MethodResult sequential_partition(const Network& network, const ScenarioSet& scenarios,
                                  const PipelineConfig& config) {
    check_config(config, network);
    MethodResult result;
    result.method = Method::congestion_contribution;
    const auto dispatches = scenario_dispatches(network, scenarios, config);
    fill_diagnostics(result, dispatches, scenarios.size());

    const GeneralizedPtdf s = generalized_ptdf(ptdf_matrix(network, 0), network);
    WelfareEvaluator evaluator(network, scenarios, config.welfare);
    if (evaluator.servable_scenarios() == 0) throw InfeasibleError("every scenario is unservable");

    Partition incumbent = single_zone(network.num_buses());
    double incumbent_total = evaluator.evaluate(incumbent).mean.total;
    result.candidates.push_back(incumbent);
    result.accepted_totals.push_back(incumbent_total);

    std::vector<int> queue;
    for (const auto& f : result.line_frequencies)
        if (f.frequency >= config.frequency_floor) queue.push_back(f.branch);

    const int passes = config.revisit_rejected ? 2 : 1;
    for (int pass = 0; pass < passes && !queue.empty(); ++pass) {
        std::vector<int> rejected;
        for (int line : queue) {
            SplitStep step;
            step.line = line;
            step.incumbent_total = incumbent_total;
            const auto& br = network.branches[static_cast<std::size_t>(line)];
            const int zone = incumbent.zone_of[static_cast<std::size_t>(br.from_bus)];
            if (zone != incumbent.zone_of[static_cast<std::size_t>(br.to_bus)]) {
                step.note = "already inter-zonal";
                result.steps.push_back(std::move(step));
                continue;
            }
            if (incumbent.k >= config.max_k) {
                step.note = "max_k reached";
                result.steps.push_back(std::move(step));
                continue;
            }
            std::vector<int> scope;
            for (std::size_t b = 0; b < incumbent.zone_of.size(); ++b)
                if (incumbent.zone_of[b] == zone) scope.push_back(static_cast<int>(b));
            Bipartition split;
            try {
                split = sign_bipartition(s, line, scope, network);
            } catch (const DegenerateSplitError& e) {
                step.note = e.what();
                result.steps.push_back(std::move(step));
                rejected.push_back(line);
                continue;
            }
            std::vector<int> labels = incumbent.zone_of;
            for (int b : split.zone_minus) labels[static_cast<std::size_t>(b)] = incumbent.k;
            Partition tentative = make_partition(labels);
            step.tentative_total = evaluator.evaluate(tentative).mean.total;
            step.tentative = tentative;
            step.accepted = step.tentative_total < incumbent_total - config.tol_welfare;
            result.candidates.push_back(tentative);
            if (step.accepted) {
                incumbent = std::move(tentative);
                incumbent_total = step.tentative_total;
            } else {
                rejected.push_back(line);
            }
            result.accepted_totals.push_back(incumbent_total);
            logger()->debug("split on line {}: {} ({} vs {})", line, step.accepted ? "accepted" : "rejected",
                            step.tentative_total, step.incumbent_total);
            result.steps.push_back(std::move(step));
        }
        queue = std::move(rejected);
    }

    finish(result, evaluator);
    // The incumbent is the procedure's answer; the report ranks every tried split.
    result.recommended = incumbent;
    result.recommended_total = incumbent_total;
    return result;
}

Comparison compare_methods(const Network& network, const ScenarioSet& scenarios, const PipelineConfig& config) {
    Comparison c;
    c.lmp = lmp_pipeline(network, scenarios, config);
    c.ptdf = sequential_partition(network, scenarios, config);
    const double diff = c.lmp.recommended_total - c.ptdf.recommended_total;
    if (std::abs(diff) > config.tol_welfare)
        c.winner = diff < 0.0 ? Method::lmp_consensus : Method::congestion_contribution;
    return c;
}

std::string method_result_to_json(const MethodResult& result) { return result_json(result).dump(2); }

std::string comparison_to_json(const Comparison& comparison) {
    nlohmann::ordered_json doc;
    auto& table = doc["table"] = nlohmann::ordered_json::array();
    for (const MethodResult* r : {&comparison.lmp, &comparison.ptdf}) {
        nlohmann::ordered_json row;
        row["method"] = to_string(r->method);
        row["k"] = r->recommended.k;
        row["total"] = round12(r->recommended_total);
        row["zone_of"] = r->recommended.zone_of;
        table.push_back(std::move(row));
    }
    doc["winner"] = comparison.winner ? to_string(*comparison.winner) : "tie";
    doc["lmp_consensus"] = result_json(comparison.lmp);
    doc["congestion_contribution"] = result_json(comparison.ptdf);
    return doc.dump(2);
}

std::string comparison_to_text(const Comparison& comparison) {
    std::ostringstream out;
    out << fmt::format("{:<26}{:>4}  {:>18}\n", "method", "k", "mean total");
    for (const MethodResult* r : {&comparison.lmp, &comparison.ptdf})
        out << fmt::format("{:<26}{:>4}  {:>18}\n", to_string(r->method), r->recommended.k,
                           format_number(r->recommended_total));
    out << "winner: " << (comparison.winner ? to_string(*comparison.winner) : "tie") << '\n';
    return out.str();
}

}  // namespace gridzones
