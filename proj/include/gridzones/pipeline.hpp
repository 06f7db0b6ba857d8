#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridzones/clustering.hpp"
#include "gridzones/ptdf.hpp"
#include "gridzones/welfare.hpp"

namespace gridzones {

enum class Method { lmp_consensus, congestion_contribution };

std::string to_string(Method method);

struct PipelineConfig {
    int max_k = 6;
    int k_scenario = 0;            // per-scenario Ward cut; 0 means max_k
    double tol_welfare = 1e-6;     // currency/h a split must save to be accepted
    double frequency_floor = 0.0;  // lines congested less often are skipped
    bool revisit_rejected = false; // one extra pass over rejected lines
    WelfareConfig welfare;
};

struct LineFrequency {
    int branch = 0;
    double frequency = 0.0;
    friend bool operator==(const LineFrequency&, const LineFrequency&) = default;
};

/// One tentative split of the sequential procedure.
struct SplitStep {
    int line = 0;
    double incumbent_total = 0.0;
    double tentative_total = 0.0;
    bool accepted = false;
    std::optional<Partition> tentative;  // empty when the split was degenerate
    std::string note;
};

struct MethodResult {
    Method method = Method::lmp_consensus;
    std::vector<Partition> candidates;
    WelfareReport report;
    Partition recommended;
    double recommended_total = 0.0;

    // diagnostics
    std::vector<std::vector<int>> congested_per_scenario;  // empty for unservable scenarios
    std::vector<LineFrequency> line_frequencies;
    int skipped_scenarios = 0;
    std::vector<SplitStep> steps;          // congestion_contribution only
    std::vector<double> accepted_totals;   // incumbent total after each iteration
};

/// Per-scenario LMPs clustered with connectivity-constrained Ward, then CSPA
/// consensus for k = 1..max_k, ranked by the welfare criterion.
MethodResult lmp_pipeline(const Network& network, const ScenarioSet& scenarios,
                          const PipelineConfig& config = {});

/// Share of all scenarios in which each branch binds (unservable scenarios
/// count as not binding); descending, ties by smaller branch id.
/// Never-binding branches are omitted.
std::vector<LineFrequency> congestion_frequency(const Network& network, const ScenarioSet& scenarios,
                                                const PipelineConfig& config = {});

/// Sequential bipartition along the most frequently congested lines using the
/// signs of the generalized PTDF; a split is kept only if it lowers the mean
/// total cost by more than tol_welfare.
MethodResult sequential_partition(const Network& network, const ScenarioSet& scenarios,
                                  const PipelineConfig& config = {});

struct Comparison {
    MethodResult lmp;
    MethodResult ptdf;
    std::optional<Method> winner;  // empty on a tie
};

Comparison compare_methods(const Network& network, const ScenarioSet& scenarios,
                           const PipelineConfig& config = {});

std::string method_result_to_json(const MethodResult& result);
std::string comparison_to_json(const Comparison& comparison);
std::string comparison_to_text(const Comparison& comparison);

}  // namespace gridzones
