#include "wayfind/experiments.hpp"

#include "wayfind/error.hpp"
#include "wayfind/evaluation.hpp"
#include "wayfind/io.hpp"
#include "wayfind/parallel.hpp"
#include "wayfind/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace wayfind {

namespace {

const char* const kBalancedNote =
    "balanced accuracy averages recall over classes with at least one test sample; absent classes are excluded";

std::string join_indices(std::span<const std::size_t> idx) {
    std::string s;
    for (std::size_t i : idx) s += std::to_string(i) + ",";
    return s;
}

ReportRow forest_row(std::string configuration, int rep, const RandomForestModel& model, const Dataset& train,
                     const Dataset& test) {
    const auto classes = class_range(std::max(model.n_classes, test.n_classes()));
    std::vector<int> truth, pred;
    for (const Sample& s : test.samples) {
        truth.push_back(s.target);
        pred.push_back(rf_predict(model, s.features));
    }
    const EvalReport r = evaluate(truth, pred, classes);
    return {std::move(configuration), rep, r.accuracy, r.balanced_accuracy, train.size(), test.size(), {}};
}

void record_common(ExperimentReport& report, const Dataset& ds, const ExperimentConfig& cfg) {
    report.provenance["dataset_hash"] = io::dataset_hash(ds);
    report.provenance["n_samples"] = std::to_string(ds.size());
    report.provenance["seed"] = std::to_string(cfg.split.seed);
    report.provenance["train_fraction"] = io::format_double(cfg.split.train_fraction);
    report.provenance["forest_seed"] = std::to_string(cfg.forest.seed);
    report.provenance["n_trees"] = std::to_string(cfg.forest.n_trees);
    report.provenance["max_depth"] = std::to_string(cfg.forest.max_depth);
    report.provenance["mtry"] = cfg.forest.mtry ? std::to_string(*cfg.forest.mtry) : "auto";
    report.provenance["bootstrap"] = cfg.forest.bootstrap ? "true" : "false";
    report.provenance["min_samples_split"] = std::to_string(cfg.forest.min_samples_split);
    report.notes.emplace_back(kBalancedNote);
}

} // namespace

double forest_accuracy(const RandomForestModel& model, const Dataset& test) {
    if (test.size() == 0) throw Error("empty test set");
    std::size_t hits = 0;
    for (const Sample& s : test.samples) hits += rf_predict(model, s.features) == s.target;
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

UsageStats usage_stats(std::span<const DecisionSequence> sequences) {
    if (sequences.empty()) throw Error("no sequences");
    UsageStats st;
    std::map<int, std::size_t> total;
    for (const DecisionSequence& s : sequences) {
        for (const NodeId& id : s.nodes) {
            ++st.overall[id];
            ++st.per_task[s.task][id];
        }
        auto& len = st.lengths[s.task];
        const std::size_t n = s.nodes.size();
        if (len.n == 0) {
            len.min = len.max = n;
        } else {
            len.min = std::min(len.min, n);
            len.max = std::max(len.max, n);
        }
        ++len.n;
        total[s.task] += n;
    }
    for (auto& [task, len] : st.lengths) len.mean = static_cast<double>(total[task]) / static_cast<double>(len.n);
    return st;
}

std::string usage_to_csv(const UsageStats& stats) {
    std::string out = "section,task,key,value\n";
    for (const auto& [task, len] : stats.lengths) {
        const std::string t = std::to_string(task);
        out += "length," + t + ",sequences," + std::to_string(len.n) + "\n";
        out += "length," + t + ",mean," + io::format_double(len.mean) + "\n";
        out += "length," + t + ",min," + std::to_string(len.min) + "\n";
        out += "length," + t + ",max," + std::to_string(len.max) + "\n";
    }
    for (const auto& [id, n] : stats.overall) out += "usage,all," + id + "," + std::to_string(n) + "\n";
    for (const auto& [task, counts] : stats.per_task)
        for (const auto& [id, n] : counts) out += "usage," + std::to_string(task) + "," + id + "," + std::to_string(n) + "\n";
    return out;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::set<std::string> extra_names;
    for (const auto& r : report.rows)
        for (const auto& [k, v] : r.extras) extra_names.insert(k);
    std::string out = "configuration,repetition,accuracy,balanced_accuracy,n_train,n_test";
    for (const auto& k : extra_names) out += "," + k;
    out += "\n";
    for (const auto& r : report.rows) {
        out += r.configuration + "," + std::to_string(r.repetition) + "," + io::format_double(r.accuracy) + "," +
               io::format_double(r.balanced_accuracy) + "," + std::to_string(r.n_train) + "," +
               std::to_string(r.n_test);
        for (const auto& k : extra_names) {
            const auto it = r.extras.find(k);
            out += ",";
            if (it != r.extras.end()) out += io::format_double(it->second);
        }
        out += "\n";
    }
    return out;
}

std::string report_provenance_json(const ExperimentReport& report) {
    nlohmann::json j{{"format", io::kFormatVersion},
                     {"experiment", report.name},
                     {"provenance", report.provenance},
                     {"notes", report.notes}};
    return j.dump(2) + "\n";
}

ExperimentReport compare_baselines(const Dataset& ds, const ExperimentConfig& cfg) {
    const Split sp = split(ds, cfg.split);
    ExperimentReport report;
    report.name = "compare";
    record_common(report, ds, cfg);

    const RandomForestModel rf = rf_train(sp.train, cfg.forest, cfg.jobs);
    report.rows.push_back(forest_row("rf", 0, rf, sp.train, sp.test));

    const LogisticModel mlr = mlr_train(sp.train, cfg.mlr);
    const auto classes = class_range(std::max(mlr.n_classes, ds.n_classes()));
    std::vector<int> truth, pred;
    for (const Sample& s : sp.test.samples) {
        truth.push_back(s.target);
        pred.push_back(mlr_predict(mlr, s.features));
    }
    const EvalReport r = evaluate(truth, pred, classes);
    ReportRow row{"mlr", 0, r.accuracy, r.balanced_accuracy, sp.train.size(), sp.test.size(), {}};
    row.extras["pseudo_r2"] = mcfadden_pseudo_r2(mlr, sp.train);
    row.extras["iterations"] = mlr.training_log.iterations;
    report.rows.push_back(std::move(row));

    report.provenance["mlr_learning_rate"] = io::format_double(cfg.mlr.learning_rate);
    report.provenance["mlr_max_iters"] = std::to_string(cfg.mlr.max_iters);
    report.provenance["mlr_l2"] = io::format_double(cfg.mlr.l2);
    report.notes.emplace_back("pseudo_r2 is McFadden's: 1 - LL(model) / LL(intercept-only) on the training split");
    report.notes.emplace_back("reference values from the original VR study: RF accuracy 93%, MLR accuracy 5%, "
                              "R^2 0.07 (not reproducible without the original data)");
    return report;
}

ExperimentReport per_task_models(const Dataset& ds, const ExperimentConfig& cfg) {
    std::map<int, std::vector<std::size_t>> by_task;
    for (std::size_t i = 0; i < ds.size(); ++i) by_task[ds.samples[i].task].push_back(i);
    if (by_task.empty()) throw Error("empty dataset");
    ExperimentReport report;
    report.name = "per-task";
    record_common(report, ds, cfg);
    for (const auto& [task, idx] : by_task) {
        const Dataset part = subset(ds, idx);
        std::set<int> classes;
        for (const Sample& s : part.samples) classes.insert(s.target);
        if (classes.size() < 2) throw Error("task " + std::to_string(task) + " has fewer than 2 classes");
        const Split sp = split(part, cfg.split);
        const RandomForestModel rf = rf_train(sp.train, cfg.forest, cfg.jobs);
        ReportRow row = forest_row("task" + std::to_string(task), 0, rf, sp.train, sp.test);
        row.extras["n_samples"] = static_cast<double>(part.size());
        report.rows.push_back(std::move(row));
    }
    report.notes.emplace_back("reference values from the original VR study (accuracy/balanced accuracy): "
                              "task1 95%/89%, task2 93%/88%, task3 96%/89%, task4 80%/80%");
    return report;
}

ExperimentReport profile_ablation(const Dataset& ds, const std::map<std::string, PersonProfile>& profiles,
                                  const ExperimentConfig& cfg) {
    if (ds.has_profiles()) throw Error("ablation expects a dataset without profile features");
    const Dataset with = with_profiles(ds, profiles);
    const Split a = split(ds, cfg.split);
    const Split b = split(with, cfg.split);
    const std::string hash_a = io::digest(join_indices(a.train_indices) + "|" + join_indices(a.test_indices));
    const std::string hash_b = io::digest(join_indices(b.train_indices) + "|" + join_indices(b.test_indices));
    if (hash_a != hash_b) throw Error("ablation splits differ");

    ExperimentReport report;
    report.name = "ablate";
    record_common(report, ds, cfg);
    report.provenance["split_index_hash"] = hash_a;
    report.provenance["dataset_hash_with_profiles"] = io::dataset_hash(with);

    const RandomForestModel without_model = rf_train(a.train, cfg.forest, cfg.jobs);
    ReportRow r1 = forest_row("without_profiles", 0, without_model, a.train, a.test);
    r1.extras["n_features"] = static_cast<double>(ds.n_features());
    const RandomForestModel with_model = rf_train(b.train, cfg.forest, cfg.jobs);
    ReportRow r2 = forest_row("with_profiles", 0, with_model, b.train, b.test);
    r2.extras["n_features"] = static_cast<double>(with.n_features());
    report.rows.push_back(std::move(r1));
    report.rows.push_back(std::move(r2));
    report.notes.emplace_back("reference values from the original VR study: accuracy 93% without profile "
                              "features, 19% with them");
    return report;
}

std::string_view to_string(SweepParam p) {
    switch (p) {
    case SweepParam::MaxDepth: return "max_depth";
    case SweepParam::NTrees: return "n_trees";
    case SweepParam::Lag: return "lag";
    }
    return "?";
}

SweepParam parse_sweep_param(std::string_view name) {
    if (name == "max_depth") return SweepParam::MaxDepth;
    if (name == "n_trees") return SweepParam::NTrees;
    if (name == "lag") return SweepParam::Lag;
    throw Error("unknown sweep parameter '" + std::string(name) + "' (expected max_depth, n_trees or lag)");
}

std::vector<int> default_sweep_values(SweepParam p) {
    std::vector<int> v;
    switch (p) {
    case SweepParam::MaxDepth:
        for (int d = 2; d <= 40; d += 2) v.push_back(d);
        break;
    case SweepParam::NTrees:
        for (int t = 1; t <= 99; t += 2) v.push_back(t);
        break;
    case SweepParam::Lag: v = {1, 2, 3, 5}; break;
    }
    return v;
}

std::uint64_t repetition_seed(std::uint64_t seed, int rep) {
    return rep == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(rep));
}

ExperimentReport sweep(const Dataset& ds, const SweepSpec& spec, const ExperimentConfig& cfg) {
    if (spec.values.empty()) throw Error("sweep needs at least one value");
    for (std::size_t i = 1; i < spec.values.size(); ++i)
        if (spec.values[i] <= spec.values[i - 1]) throw Error("sweep values must be strictly increasing");
    if (spec.repetitions < 1) throw Error("repetitions must be >= 1");
    for (int v : spec.values) {
        if (v < 1) throw Error("sweep values must be >= 1");
        if (spec.parameter == SweepParam::Lag && v > ds.lag)
            throw Error("lag " + std::to_string(v) + " exceeds the dataset lag " + std::to_string(ds.lag));
    }

    const Split sp = split(ds, cfg.split);
    const std::string name(to_string(spec.parameter));
    const std::size_t n_points = spec.values.size() * static_cast<std::size_t>(spec.repetitions);
    std::vector<ReportRow> rows(n_points);
    parallel_for(n_points, cfg.jobs, [&](std::size_t job) {
        const int value = spec.values[job / static_cast<std::size_t>(spec.repetitions)];
        const int rep = static_cast<int>(job % static_cast<std::size_t>(spec.repetitions));
        ForestParams params = cfg.forest;
        params.seed = repetition_seed(cfg.forest.seed, rep);
        const Dataset* train = &sp.train;
        const Dataset* test = &sp.test;
        Dataset train_lag, test_lag;
        switch (spec.parameter) {
        case SweepParam::MaxDepth: params.max_depth = value; break;
        case SweepParam::NTrees: params.n_trees = value; break;
        case SweepParam::Lag:
            train_lag = truncate_lag(sp.train, value);
            test_lag = truncate_lag(sp.test, value);
            train = &train_lag;
            test = &test_lag;
            break;
        }
        const RandomForestModel model = rf_train(*train, params, 1);
        rows[job] = forest_row(name + "=" + std::to_string(value), rep, model, *train, *test);
        rows[job].extras[name] = value;
    });

    ExperimentReport report;
    report.name = "sweep";
    report.rows = std::move(rows);
    record_common(report, ds, cfg);
    report.provenance["parameter"] = name;
    report.provenance["repetitions"] = std::to_string(spec.repetitions);
    report.provenance["split"] = "drawn once from the full dataset and shared by every point";
    if (spec.repetitions > 1) {
        for (std::size_t v = 0; v < spec.values.size(); ++v) {
            double sum = 0.0, sq = 0.0;
            const auto reps = static_cast<std::size_t>(spec.repetitions);
            for (std::size_t r = 0; r < reps; ++r) sum += report.rows[v * reps + r].accuracy;
            const double mean = sum / static_cast<double>(reps);
            for (std::size_t r = 0; r < reps; ++r) {
                const double d = report.rows[v * reps + r].accuracy - mean;
                sq += d * d;
            }
            const double sd = std::sqrt(sq / static_cast<double>(reps - 1));
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s=%d: accuracy %.4f +- %.4f over %d repetitions", name.c_str(),
                          spec.values[v], mean, sd, spec.repetitions);
            report.notes.emplace_back(buf);
        }
    }
    if (spec.parameter == SweepParam::Lag)
        report.notes.emplace_back("reference values from the original VR study (accuracy/balanced accuracy): "
                                  "lag 1 93%/87%, lag 2 92%/81%, lag 3 93%/84%, lag 5 93%/84%");
    if (spec.parameter == SweepParam::MaxDepth)
        report.notes.emplace_back("reference observation from the original VR study: accuracy stops improving "
                                  "noticeably beyond a depth of 12");
    return report;
}

ImportanceReport importance_report(const RandomForestModel& model) {
    ImportanceReport r;
    r.fscore = feature_importance_fscore(model);
    // a forest of single leaves has nothing to rank
    if (std::all_of(r.fscore.begin(), r.fscore.end(), [](const auto& f) { return f.second == 0; })) r.fscore.clear();
    for (auto& levels : top_nodes(model, 2))
        if (!levels.empty()) r.top_levels.push_back(std::move(levels));
    return r;
}

std::string importance_to_text(const ImportanceReport& report) {
    std::string out = "feature,fscore\n";
    for (const auto& [name, count] : report.fscore) out += name + "," + std::to_string(count) + "\n";
    out += "\ntree,top_level_features\n";
    for (std::size_t t = 0; t < report.top_levels.size(); ++t) {
        out += std::to_string(t) + ",";
        for (std::size_t k = 0; k < report.top_levels[t].size(); ++k)
            out += (k ? " " : "") + report.top_levels[t][k];
        out += "\n";
    }
    return out;
}

} // namespace wayfind
