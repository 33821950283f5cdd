#include "wayfind/evaluation.hpp"

#include "wayfind/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace wayfind {

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < size(); ++j) s += at(i, j);
    return s;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < size(); ++i) s += at(i, i);
    return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const int> classes) {
    if (y_true.size() != y_pred.size())
        throw Error("label vectors differ in length (" + std::to_string(y_true.size()) + " vs " +
                    std::to_string(y_pred.size()) + ")");
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    std::unordered_map<int, std::size_t> slot;
    for (std::size_t i = 0; i < cm.classes.size(); ++i)
        if (!slot.emplace(cm.classes[i], i).second) throw Error("duplicate class in class set");
    cm.counts.assign(cm.classes.size() * cm.classes.size(), 0);
    const auto lookup = [&](int label) {
        const auto it = slot.find(label);
        if (it == slot.end()) throw Error("label " + std::to_string(label) + " is not in the class set");
        return it->second;
    };
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++cm.counts[lookup(y_true[i]) * cm.classes.size() + lookup(y_pred[i])];
    cm.n = y_true.size();
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.n == 0) throw Error("accuracy is undefined for zero samples");
    return static_cast<double>(cm.trace()) / static_cast<double>(cm.n);
}

std::map<int, double> per_class_recall(const ConfusionMatrix& cm) {
    std::map<int, double> out;
    for (std::size_t i = 0; i < cm.size(); ++i) {
        const std::size_t total = cm.row_sum(i);
        if (total == 0) continue;
        out[cm.classes[i]] = static_cast<double>(cm.at(i, i)) / static_cast<double>(total);
    }
    return out;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    const auto recalls = per_class_recall(cm);
    if (recalls.empty()) throw Error("balanced accuracy is undefined without true samples");
    double sum = 0.0;
    for (const auto& [cls, r] : recalls) sum += r;
    return sum / static_cast<double>(recalls.size());
}

EvalReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, std::span<const int> classes) {
    EvalReport r;
    r.confusion = confusion_matrix(y_true, y_pred, classes);
    r.n = r.confusion.n;
    r.accuracy = accuracy(r.confusion);
    r.per_class_recall = per_class_recall(r.confusion);
    r.balanced_accuracy = balanced_accuracy(r.confusion);
    return r;
}

std::vector<int> class_range(int n_classes) {
    std::vector<int> out(static_cast<std::size_t>(std::max(n_classes, 0)));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
    return out;
}

std::map<NodeId, double> per_node_report(const ConfusionMatrix& cm, const LabelEncoder& node_encoder) {
    std::map<NodeId, double> out;
    for (const auto& [cls, recall] : per_class_recall(cm)) out[node_encoder.decode(cls)] = recall;
    return out;
}

std::vector<int> predict_all(const Predictor& predict, std::span<const Sample> samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) out.push_back(predict(s.features));
    return out;
}

std::map<std::string, EvalReport> group_eval(std::span<const Sample> samples, const Predictor& predict,
                                             const GroupKey& key, std::span<const int> classes) {
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> parts;
    for (const Sample& s : samples) {
        const auto group = key(s);
        if (!group) throw Error("sample of participant '" + s.participant + "' lacks the grouping attribute");
        auto& [truth, pred] = parts[*group];
        truth.push_back(s.target);
        pred.push_back(predict(s.features));
    }
    std::map<std::string, EvalReport> out;
    for (const auto& [group, labels] : parts) out.emplace(group, evaluate(labels.first, labels.second, classes));
    return out;
}

GroupKey profile_group(const std::map<std::string, PersonProfile>& profiles, std::string field) {
    // validates the field name up front
    if (field != "age" && field != "height") profile_category(PersonProfile{}, field);
    return [profiles, field](const Sample& s) -> std::optional<std::string> {
        const auto it = profiles.find(s.participant);
        if (it == profiles.end()) return std::nullopt;
        if (field == "age") return std::to_string(static_cast<int>(it->second.age));
        if (field == "height") return std::to_string(static_cast<int>(it->second.height));
        return profile_category(it->second, field);
    };
}

GroupKey task_group() {
    return [](const Sample& s) -> std::optional<std::string> { return "task" + std::to_string(s.task); };
}

GroupKey crossed_group(GroupKey first, GroupKey second) {
    return [first = std::move(first), second = std::move(second)](const Sample& s) -> std::optional<std::string> {
        auto a = first(s);
        auto b = second(s);
        if (!a || !b) return std::nullopt;
        return *a + "|" + *b;
    };
}

} // namespace wayfind
