#pragma once

#include "wayfind/dataset.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wayfind {

/// counts(i, j) = samples of true class classes[i] predicted as classes[j].
struct ConfusionMatrix {
    std::vector<int> classes;
    std::vector<std::size_t> counts;
    std::size_t n = 0;

    std::size_t size() const noexcept { return classes.size(); }
    std::size_t at(std::size_t i, std::size_t j) const { return counts[i * classes.size() + j]; }
    std::size_t row_sum(std::size_t i) const;
    std::size_t trace() const;
};

struct EvalReport {
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    std::map<int, double> per_class_recall; ///< only classes with >= 1 true sample
    ConfusionMatrix confusion;
    std::size_t n = 0;
};

/// Throws Error on a length mismatch or a label outside `classes`.
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const int> classes);

/// trace / n. Throws Error when n = 0.
double accuracy(const ConfusionMatrix& cm);

/// Recall per class that has at least one true sample.
std::map<int, double> per_class_recall(const ConfusionMatrix& cm);

/// Mean recall over classes with at least one true sample; classes absent
/// from the truth are excluded. Throws Error when there are no true samples.
double balanced_accuracy(const ConfusionMatrix& cm);

EvalReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, std::span<const int> classes);

/// Classes 0..n-1.
std::vector<int> class_range(int n_classes);

/// Per-class recall keyed by decoded node label.
std::map<NodeId, double> per_node_report(const ConfusionMatrix& cm, const LabelEncoder& node_encoder);

using Predictor = std::function<int(std::span<const double>)>;
/// Group key for a sample; nullopt means the attribute is missing.
using GroupKey = std::function<std::optional<std::string>(const Sample&)>;

std::vector<int> predict_all(const Predictor& predict, std::span<const Sample> samples);

/// Partitions `samples` by `key` and evaluates each partition. Throws Error
/// when a sample has no value for the attribute.
std::map<std::string, EvalReport> group_eval(std::span<const Sample> samples, const Predictor& predict,
                                             const GroupKey& key, std::span<const int> classes);

/// Group keys drawn from participant profiles ("gender", "device",
/// "building_familiarity", ...), by task, and the cross of two keys.
GroupKey profile_group(const std::map<std::string, PersonProfile>& profiles, std::string field);
GroupKey task_group();
GroupKey crossed_group(GroupKey first, GroupKey second);

} // namespace wayfind
