#pragma once

#include "wayfind/dataset.hpp"
#include "wayfind/logistic.hpp"
#include "wayfind/random_forest.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wayfind {

struct LengthSummary {
    std::size_t n = 0;
    double mean = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
};

/// Node visit counts (one per visit) and sequence-length summaries.
struct UsageStats {
    std::map<NodeId, std::size_t> overall;
    std::map<int, std::map<NodeId, std::size_t>> per_task;
    std::map<int, LengthSummary> lengths;
};

/// Throws Error on an empty sequence set.
UsageStats usage_stats(std::span<const DecisionSequence> sequences);
std::string usage_to_csv(const UsageStats& stats);

struct ReportRow {
    std::string configuration;
    int repetition = 0;
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::map<std::string, double> extras;
};

struct ExperimentReport {
    std::string name;
    std::vector<ReportRow> rows;
    std::map<std::string, std::string> provenance;
    std::vector<std::string> notes;
};

/// Header configuration,repetition,accuracy,balanced_accuracy,n_train,n_test
/// followed by the union of extra columns in name order.
std::string report_to_csv(const ExperimentReport& report);
/// Name, provenance and notes as a JSON document.
std::string report_provenance_json(const ExperimentReport& report);

struct ExperimentConfig {
    ForestParams forest;
    MlrConfig mlr;
    SplitConfig split;
    int jobs = 1;
};

/// RF and MLR on the identical split; the MLR row carries pseudo_r2.
ExperimentReport compare_baselines(const Dataset& ds, const ExperimentConfig& cfg);

/// One independently split and trained forest per task present.
ExperimentReport per_task_models(const Dataset& ds, const ExperimentConfig& cfg);

/// Rows "without_profiles" and "with_profiles" on the identical split.
ExperimentReport profile_ablation(const Dataset& ds, const std::map<std::string, PersonProfile>& profiles,
                                  const ExperimentConfig& cfg);

enum class SweepParam { MaxDepth, NTrees, Lag };

std::string_view to_string(SweepParam p);
/// Throws Error for an unknown name.
SweepParam parse_sweep_param(std::string_view name);
/// max_depth 2..40 step 2, n_trees 1..99 step 2, lag {1, 2, 3, 5}.
std::vector<int> default_sweep_values(SweepParam p);

struct SweepSpec {
    SweepParam parameter = SweepParam::MaxDepth;
    std::vector<int> values;
    int repetitions = 1;
};

/// Seed of repetition `rep`: the base seed itself for rep 0.
std::uint64_t repetition_seed(std::uint64_t seed, int rep);

/// The split is drawn once (from the full dataset, before any lag
/// truncation) and shared by every point; each point retrains a forest with
/// one parameter changed. Rows are ordered by value, then repetition.
ExperimentReport sweep(const Dataset& ds, const SweepSpec& spec, const ExperimentConfig& cfg);

struct ImportanceReport {
    std::vector<std::pair<std::string, std::size_t>> fscore;
    std::vector<std::vector<std::string>> top_levels; ///< per tree, depth < 2
};

ImportanceReport importance_report(const RandomForestModel& model);
std::string importance_to_text(const ImportanceReport& report);

/// Fraction of test samples the forest predicts correctly.
double forest_accuracy(const RandomForestModel& model, const Dataset& test);

} // namespace wayfind
