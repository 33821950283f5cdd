#include "wayfind/cli.hpp"

#include "wayfind/error.hpp"
#include "wayfind/evaluation.hpp"
#include "wayfind/experiments.hpp"
#include "wayfind/io.hpp"
#include "wayfind/synthgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <set>

namespace wayfind::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 7;

struct Options {
    int jobs = 1;
    std::uint64_t seed = kDefaultSeed;

    // net
    std::string net;

    // synth
    std::string spec;
    int agents = 70;
    std::string out_dir;
    double noise = 0.0;
    int interval_ms = 10;
    double deviation_scale = 1.0;
    double speed = 1.4;

    // map
    std::string transforms;
    std::string control_points;
    double z_band = 1.0;
    std::string traj;
    double snap_radius = 2.0;

    // featurize
    std::string sequences;
    std::string profiles;
    int lag = 1;
    double split_fraction = 0.8;

    // train / eval / exp
    std::string algo;
    std::string data;
    std::string model;
    std::string out;
    std::string per_node;
    std::string group_by = "none";
    int trees = 5;
    int max_depth = 15;
    int mtry = 0;
    int min_samples_split = 2;
    bool no_bootstrap = false;
    double learning_rate = 1.0;
    int max_iters = 500;
    double l2 = 1e-4;

    // sweep
    std::string param;
    int from = 0;
    int to = 0;
    int step = 0;
    std::vector<int> values;
    int reps = 1;
};

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

void report_error(std::ostream& err, int code, const std::string& source, const std::string& location,
                  const std::string& message) {
    err << "error: code=" << code << " source=" << (source.empty() ? "-" : one_line(source))
        << " location=" << (location.empty() ? "-" : one_line(location)) << " message=\"" << one_line(message)
        << "\"\n";
}

std::uint64_t parse_seed_text(const std::string& text, const std::string& source) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw InputError(source, "", "'" + text + "' is not a non-negative integer seed");
    return v;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Writes <dir>/<stem>.provenance.json (deterministic) and
/// <dir>/<stem>.timestamp (wall clock).
void write_provenance(const fs::path& dir, const std::string& stem, const std::string& command,
                      const Options& opt, json parameters, const std::vector<fs::path>& inputs,
                      const std::vector<fs::path>& outputs) {
    json in = json::object();
    for (const auto& p : inputs) in[p.filename().string()] = io::file_digest(p);
    json out = json::object();
    for (const auto& p : outputs) out[p.filename().string()] = io::file_digest(p);
    const json doc{{"format", io::kFormatVersion},
                   {"tool", "wayfind"},
                   {"version", kVersion},
                   {"command", command},
                   {"seed", opt.seed},
                   {"parameters", std::move(parameters)},
                   {"inputs", std::move(in)},
                   {"outputs", std::move(out)}};
    io::write_text(dir / (stem + ".provenance.json"), doc.dump(2) + "\n");
    io::write_text(dir / (stem + ".timestamp"), utc_timestamp() + "\n");
}

void write_provenance_for(const fs::path& output, const std::string& command, const Options& opt, json parameters,
                          const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
    write_provenance(output.parent_path(), output.stem().string(), command, opt, std::move(parameters), inputs,
                     outputs);
}

std::string fmt(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// --- net ----------------------------------------------------------------------

int cmd_net_validate(const Options& opt, std::ostream& out) {
    const IndoorNetwork net = io::read_network(opt.net);
    std::size_t issues = 0;
    for (const auto& v : validate_numbering(net)) {
        out << "violation," << v.node << "," << v.rule << "," << v.detail << "\n";
        ++issues;
    }
    if (!net.is_connected()) {
        out << "violation,-,connectivity,network is not connected\n";
        ++issues;
    }
    if (issues > 0) throw InputError(opt.net, "", std::to_string(issues) + " validation issue(s)");
    out << "ok," << net.size() << " nodes," << net.links().size() << " links\n";
    return 0;
}

int cmd_net_stats(const Options& opt, std::ostream& out) {
    const IndoorNetwork net = io::read_network(opt.net);
    out << "key,value\n";
    out << "nodes," << net.size() << "\n";
    out << "links," << net.links().size() << "\n";
    out << "levels," << net.levels().size() << "\n";
    out << "ground_level," << net.ground_level() << "\n";
    for (NodeKind k : {NodeKind::CorridorJunction, NodeKind::RoomAccess, NodeKind::Staircase, NodeKind::Exit})
        out << "nodes_" << to_string(k) << "," << net.count(k) << "\n";
    for (LinkKind k : {LinkKind::SameLevel, LinkKind::StairStair, LinkKind::StairAccess})
        out << "links_" << to_string(k) << "," << net.count(k) << "\n";
    out << "connected," << (net.is_connected() ? "true" : "false") << "\n";
    out << "numbering_violations," << validate_numbering(net).size() << "\n";
    for (int level : net.levels()) {
        out << "level_" << level << "_nodes," << net.nodes_on_level(level).size() << "\n";
        const double s = net.min_node_spacing(level);
        if (std::isfinite(s)) out << "level_" << level << "_min_spacing_m," << io::format_double(s) << "\n";
    }
    return 0;
}

// --- synth --------------------------------------------------------------------

BuildingSpec read_building_spec(const std::string& path) {
    BuildingSpec spec;
    if (path.empty()) return spec;
    const std::string text = io::read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw InputError(path, std::to_string(line), "malformed JSON");
    }
    if (!j.is_object()) throw InputError(path, "$", "expected an object");
    static const std::set<std::string> known{"n_levels",      "corridor_length_m", "corridor_width_m",
                                             "nodes_per_corridor", "n_stair_shafts", "n_exits",
                                             "target_nodes",  "floor_height_m"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw InputError(path, "$." + key, "unknown building field");
    const auto get_int = [&](const char* key, int& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) throw InputError(path, std::string("$.") + key, "expected an integer");
        dst = j[key].get<int>();
    };
    const auto get_real = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw InputError(path, std::string("$.") + key, "expected a number");
        dst = j[key].get<double>();
    };
    get_int("n_levels", spec.n_levels);
    get_real("corridor_length_m", spec.corridor_length_m);
    get_real("corridor_width_m", spec.corridor_width_m);
    get_int("nodes_per_corridor", spec.nodes_per_corridor);
    get_int("n_stair_shafts", spec.n_stair_shafts);
    get_int("n_exits", spec.n_exits);
    get_real("floor_height_m", spec.floor_height_m);
    if (j.contains("target_nodes")) {
        if (j["target_nodes"].is_null()) {
            spec.target_nodes.reset();
        } else {
            int t = 0;
            get_int("target_nodes", t);
            spec.target_nodes = t;
        }
    }
    return spec;
}

int cmd_synth(const Options& opt, std::ostream& out, std::ostream& err) {
    if (opt.agents < 1) throw InputError("--agents", "", "must be >= 1");
    if (!(opt.deviation_scale >= 0.0)) throw InputError("--deviation-scale", "", "must be >= 0");
    const BuildingSpec spec = read_building_spec(opt.spec);
    const IndoorNetwork net = build_paper_building(spec);

    std::vector<TaskSpec> tasks = default_tasks(spec);
    for (TaskSpec& t : tasks) t.deviation_prob = std::min(0.95, *t.deviation_prob * opt.deviation_scale);
    AgentPolicy policy;
    policy.seed = opt.seed;
    const GeneratedSequences gen = generate_sequences(net, tasks, policy, opt.agents, opt.jobs);
    for (const auto& w : gen.warnings) err << "warning: " << w << "\n";

    SynthConfig cfg;
    cfg.n_agents = opt.agents;
    cfg.sample_interval_ms = opt.interval_ms;
    cfg.walk_speed_mps = opt.speed;
    cfg.position_noise_m = opt.noise;
    cfg.floor_height_m = spec.floor_height_m;
    cfg.seed = opt.seed;
    cfg.virtual_frame = default_virtual_frame(net, spec.floor_height_m);
    const auto trajectories = sequences_to_trajectories(gen.sequences, net, cfg, opt.jobs);

    std::vector<std::string> participants;
    for (int a = 0; a < opt.agents; ++a) participants.push_back(participant_id(a, opt.agents));
    const auto profiles = generate_profiles(participants, opt.seed);
    const auto control = corner_control_points(net, cfg.virtual_frame, spec);

    const fs::path dir = opt.out_dir;
    const std::vector<std::pair<fs::path, std::string>> files{
        {dir / "network.json", io::network_to_json(net)},
        {dir / "control_points.csv", io::control_points_to_csv(control)},
        {dir / "transforms.json", io::transforms_to_json(cfg.virtual_frame)},
        {dir / "trajectories.csv", io::trajectories_to_csv(trajectories)},
        {dir / "ground_truth.csv", io::sequences_to_csv(gen.sequences)},
        {dir / "profiles.csv", io::profiles_to_csv(profiles)},
    };
    std::vector<fs::path> outputs;
    for (const auto& [path, content] : files) {
        io::write_text(path, content);
        outputs.push_back(path);
    }
    json params{{"agents", opt.agents},
                {"noise_m", opt.noise},
                {"interval_ms", opt.interval_ms},
                {"walk_speed_mps", opt.speed},
                {"deviation_scale", opt.deviation_scale},
                {"building",
                 {{"n_levels", spec.n_levels},
                  {"corridor_length_m", spec.corridor_length_m},
                  {"corridor_width_m", spec.corridor_width_m},
                  {"nodes_per_corridor", spec.nodes_per_corridor},
                  {"n_stair_shafts", spec.n_stair_shafts},
                  {"n_exits", spec.n_exits},
                  {"floor_height_m", spec.floor_height_m}}},
                {"exit_convention", std::to_string(spec.n_exits) + " exits, " + std::to_string(net.size()) +
                                        " decision points"}};
    std::vector<fs::path> inputs;
    if (!opt.spec.empty()) inputs.emplace_back(opt.spec);
    write_provenance(dir, "synth", "synth", opt, std::move(params), inputs, outputs);

    const UsageStats stats = usage_stats(gen.sequences);
    out << "nodes," << net.size() << "\n";
    out << "staircases," << net.count(NodeKind::Staircase) << "\n";
    out << "exits," << net.count(NodeKind::Exit) << "\n";
    out << "sequences," << gen.sequences.size() << "\n";
    out << "dropped," << gen.warnings.size() << "\n";
    for (const auto& [task, len] : stats.lengths) out << "mean_length_task" << task << "," << fmt(len.mean, "%.2f") << "\n";
    return 0;
}

// --- map ----------------------------------------------------------------------

int cmd_map(const Options& opt, std::ostream& out, std::ostream& err) {
    const IndoorNetwork net = io::read_network(opt.net);
    std::vector<FloorTransform> transforms;
    std::vector<fs::path> inputs{opt.net, opt.traj};
    if (!opt.transforms.empty()) {
        transforms = io::read_transforms(opt.transforms);
        inputs.emplace_back(opt.transforms);
    } else {
        const auto pairs = io::parse_control_points(io::read_text(opt.control_points), opt.control_points);
        try {
            transforms = io::transforms_from_control_points(pairs, opt.z_band);
        } catch (const Error& e) {
            throw InputError(opt.control_points, "", e.what());
        }
        inputs.emplace_back(opt.control_points);
        for (const auto& t : transforms)
            out << "transform_level_" << t.level << ",scale=" << fmt(t.scale, "%.6f")
                << ",rotation=" << fmt(t.rotation, "%.6f") << ",rms_residual_m=" << fmt(t.rms_residual, "%.3g")
                << "\n";
    }
    for (const auto& t : transforms)
        if (!net.level_rank(t.level))
            throw InputError(opt.transforms.empty() ? opt.control_points : opt.transforms, "",
                             "transform for level " + std::to_string(t.level) + " not in the network");

    const auto trajectories = io::parse_trajectories(io::read_text(opt.traj), opt.traj);
    MappingConfig cfg;
    cfg.snap_radius = opt.snap_radius;
    std::vector<DecisionSequence> sequences;
    std::size_t warnings = 0;
    for (const Trajectory& t : trajectories) {
        ExtractionResult r;
        try {
            r = extract_decision_sequence(t, net, transforms, cfg);
        } catch (const InputError&) {
            throw;
        } catch (const Error& e) {
            throw InputError(opt.traj, "", t.participant + " task " + std::to_string(t.task) + ": " + e.what());
        }
        for (const auto& w : r.warnings) err << "warning: " << w << "\n";
        warnings += r.warnings.size();
        if (!r.sequence.nodes.empty()) sequences.push_back(std::move(r.sequence));
    }
    io::write_text(opt.out, io::sequences_to_csv(sequences));
    write_provenance_for(opt.out, "map", opt, json{{"snap_radius_m", opt.snap_radius}, {"z_band_m", opt.z_band}},
                         inputs, {opt.out});
    out << "trajectories," << trajectories.size() << "\n";
    out << "sequences," << sequences.size() << "\n";
    out << "warnings," << warnings << "\n";
    return 0;
}

// --- featurize ----------------------------------------------------------------

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
    return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
}

int cmd_featurize(const Options& opt, std::ostream& out) {
    const auto sequences = io::parse_sequences(io::read_text(opt.sequences), opt.sequences);
    if (sequences.empty()) throw InputError(opt.sequences, "", "no sequences");
    if (opt.lag < 1) throw InputError("--lag", "", "must be >= 1");
    std::vector<fs::path> inputs{opt.sequences};
    std::optional<LabelEncoder> encoder;
    if (!opt.net.empty()) {
        const IndoorNetwork net = io::read_network(opt.net);
        inputs.emplace_back(opt.net);
        std::vector<std::string> ids;
        for (const Node& n : net.nodes()) ids.push_back(n.id);
        encoder = LabelEncoder::fit(ids);
        for (const auto& s : sequences)
            for (const auto& id : s.nodes)
                if (!net.contains(id)) throw InputError(opt.sequences, "", "node '" + id + "' is not in the network");
    }
    Dataset ds = build_dataset(sequences, opt.lag, encoder);
    if (!opt.profiles.empty()) {
        const auto profiles = io::parse_profiles(io::read_text(opt.profiles), opt.profiles);
        inputs.emplace_back(opt.profiles);
        try {
            ds = with_profiles(ds, profiles);
        } catch (const Error& e) {
            throw InputError(opt.profiles, "", e.what());
        }
    }
    const fs::path target = opt.out;
    io::write_dataset(target, ds);
    std::vector<fs::path> outputs{target, io::encoders_path(target)};
    json params{{"lag", opt.lag}, {"profiles", !opt.profiles.empty()}};
    if (opt.split_fraction > 0.0 && opt.split_fraction < 1.0) {
        const Split sp = split(ds, {opt.split_fraction, opt.seed});
        for (const auto& [suffix, part] : {std::pair<std::string, const Dataset*>{".train", &sp.train},
                                           std::pair<std::string, const Dataset*>{".test", &sp.test}}) {
            const fs::path p = with_suffix(target, suffix);
            io::write_dataset(p, *part);
            outputs.push_back(p);
            outputs.push_back(io::encoders_path(p));
        }
        params["split_fraction"] = opt.split_fraction;
    } else if (opt.split_fraction != 0.0) {
        throw InputError("--split-fraction", "", "must lie in (0, 1), or 0 for no split");
    }
    write_provenance_for(target, "featurize", opt, std::move(params), inputs, outputs);
    out << "samples," << ds.size() << "\n";
    out << "features," << ds.n_features() << "\n";
    out << "classes," << ds.n_classes() << "\n";
    out << "dataset_hash," << io::dataset_hash(ds) << "\n";
    return 0;
}

// --- train / eval -------------------------------------------------------------

ForestParams forest_params(const Options& opt) {
    ForestParams p;
    p.n_trees = opt.trees;
    p.max_depth = opt.max_depth;
    if (opt.mtry > 0) p.mtry = opt.mtry;
    p.seed = opt.seed;
    p.min_samples_split = opt.min_samples_split;
    p.bootstrap = !opt.no_bootstrap;
    if (p.n_trees < 1) throw InputError("--trees", "", "must be >= 1");
    if (p.max_depth < 0) throw InputError("--max-depth", "", "must be >= 0");
    if (p.min_samples_split < 2) throw InputError("--min-samples-split", "", "must be >= 2");
    return p;
}

MlrConfig mlr_config(const Options& opt) {
    MlrConfig c;
    c.learning_rate = opt.learning_rate;
    c.max_iters = opt.max_iters;
    c.l2 = opt.l2;
    c.seed = opt.seed;
    if (!(c.learning_rate > 0)) throw InputError("--learning-rate", "", "must be positive");
    if (c.max_iters < 0) throw InputError("--max-iters", "", "must be >= 0");
    if (!(c.l2 >= 0)) throw InputError("--l2", "", "must be >= 0");
    return c;
}

Predictor predictor_for(const io::Model& model) {
    if (const auto* rf = std::get_if<RandomForestModel>(&model))
        return [rf](std::span<const double> x) { return rf_predict(*rf, x); };
    const auto* mlr = &std::get<LogisticModel>(model);
    return [mlr](std::span<const double> x) { return mlr_predict(*mlr, x); };
}

const std::vector<std::string>& model_features(const io::Model& model) {
    if (const auto* rf = std::get_if<RandomForestModel>(&model)) return rf->feature_names;
    return std::get<LogisticModel>(model).feature_names;
}

int model_classes(const io::Model& model) {
    if (const auto* rf = std::get_if<RandomForestModel>(&model)) return rf->n_classes;
    return std::get<LogisticModel>(model).n_classes;
}

int cmd_train(const Options& opt, std::ostream& out) {
    const Dataset ds = io::read_dataset(opt.data);
    if (ds.size() == 0) throw InputError(opt.data, "", "empty dataset");
    io::Model model;
    json params;
    if (opt.algo == "rf") {
        const ForestParams p = forest_params(opt);
        model = rf_train(ds, p, opt.jobs);
        params = {{"algo", "rf"}, {"n_trees", p.n_trees}, {"max_depth", p.max_depth}};
    } else {
        const MlrConfig c = mlr_config(opt);
        model = mlr_train(ds, c);
        params = {{"algo", "mlr"}, {"learning_rate", c.learning_rate}, {"max_iters", c.max_iters}, {"l2", c.l2}};
    }
    io::write_text(opt.out, io::model_to_json(model));
    write_provenance_for(opt.out, "train", opt, std::move(params), {opt.data, io::encoders_path(opt.data)},
                         {opt.out});
    const Predictor predict = predictor_for(model);
    std::size_t hits = 0;
    for (const Sample& s : ds.samples) hits += predict(s.features) == s.target;
    out << "algo," << opt.algo << "\n";
    out << "train_samples," << ds.size() << "\n";
    out << "train_accuracy," << fmt(static_cast<double>(hits) / static_cast<double>(ds.size())) << "\n";
    if (const auto* mlr = std::get_if<LogisticModel>(&model)) {
        out << "iterations," << mlr->training_log.iterations << "\n";
        out << "pseudo_r2_mcfadden," << fmt(mcfadden_pseudo_r2(*mlr, ds)) << "\n";
    }
    return 0;
}

GroupKey group_key(const Options& opt) {
    if (opt.group_by == "task") return task_group();
    if (opt.profiles.empty()) throw InputError("--group-by", "", "grouping by '" + opt.group_by + "' needs --profiles");
    const auto profiles = io::parse_profiles(io::read_text(opt.profiles), opt.profiles);
    const std::string field = opt.group_by == "familiarity" ? "building_familiarity" : opt.group_by;
    return profile_group(profiles, field);
}

json report_json(const EvalReport& r) {
    return {{"n", r.n}, {"accuracy", r.accuracy}, {"balanced_accuracy", r.balanced_accuracy}};
}

int cmd_eval(const Options& opt, std::ostream& out) {
    const io::Model model = io::read_model(opt.model);
    const Dataset ds = io::read_dataset(opt.data);
    if (ds.size() == 0) throw InputError(opt.data, "", "empty dataset");
    if (model_features(model) != ds.feature_names)
        throw InputError(opt.data, "", "feature schema does not match the model");
    const Predictor predict = predictor_for(model);
    const std::vector<int> classes = class_range(std::max(model_classes(model), ds.n_classes()));
    std::vector<int> truth, pred;
    for (const Sample& s : ds.samples) truth.push_back(s.target);
    pred = predict_all(predict, ds.samples);
    const EvalReport report = evaluate(truth, pred, classes);

    json doc = report_json(report);
    doc["format"] = io::kFormatVersion;
    const auto label = [&](int code) {
        return code < ds.n_classes() ? ds.node_encoder.decode(code) : "#" + std::to_string(code);
    };
    json per_node = json::object();
    for (const auto& [cls, recall] : report.per_class_recall) per_node[label(cls)] = recall;
    doc["per_node_recall"] = std::move(per_node);
    // confusion restricted to classes that occur
    std::set<int> used(truth.begin(), truth.end());
    used.insert(pred.begin(), pred.end());
    const std::vector<int> shown(used.begin(), used.end());
    const ConfusionMatrix cm = confusion_matrix(truth, pred, shown);
    json labels = json::array();
    for (int c : shown) labels.push_back(label(c));
    json rows = json::array();
    for (std::size_t i = 0; i < cm.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < cm.size(); ++j) row.push_back(cm.at(i, j));
        rows.push_back(std::move(row));
    }
    doc["confusion"] = {{"classes", std::move(labels)}, {"counts", std::move(rows)}};
    doc["notes"] = json::array({"per-node accuracy is per-class recall",
                                "balanced accuracy excludes classes without test samples"});

    out << "group,n,accuracy,balanced_accuracy\n";
    out << "all," << report.n << "," << fmt(report.accuracy) << "," << fmt(report.balanced_accuracy) << "\n";
    std::vector<fs::path> inputs{opt.model, opt.data, io::encoders_path(opt.data)};
    if (opt.group_by != "none") {
        const auto groups = group_eval(ds.samples, predict, group_key(opt), classes);
        json g = json::object();
        for (const auto& [name, r] : groups) {
            g[name] = report_json(r);
            out << name << "," << r.n << "," << fmt(r.accuracy) << "," << fmt(r.balanced_accuracy) << "\n";
        }
        doc["group_by"] = opt.group_by;
        doc["groups"] = std::move(g);
        if (!opt.profiles.empty()) inputs.emplace_back(opt.profiles);
    }
    std::vector<fs::path> outputs;
    if (!opt.per_node.empty()) {
        std::string csv = "node_id,recall\n";
        for (const auto& [cls, recall] : report.per_class_recall)
            csv += label(cls) + "," + io::format_double(recall) + "\n";
        io::write_text(opt.per_node, csv);
        outputs.emplace_back(opt.per_node);
    }
    if (!opt.out.empty()) {
        io::write_text(opt.out, doc.dump(2) + "\n");
        outputs.emplace_back(opt.out);
        write_provenance_for(opt.out, "eval", opt, json{{"group_by", opt.group_by}}, inputs, outputs);
    }
    return 0;
}

// --- exp ----------------------------------------------------------------------

ExperimentConfig experiment_config(const Options& opt) {
    ExperimentConfig cfg;
    cfg.forest = forest_params(opt);
    cfg.mlr = mlr_config(opt);
    cfg.split = {opt.split_fraction, opt.seed};
    cfg.jobs = opt.jobs;
    if (!(opt.split_fraction > 0.0 && opt.split_fraction < 1.0))
        throw InputError("--split-fraction", "", "must lie in (0, 1)");
    return cfg;
}

int emit_report(const ExperimentReport& report, const Options& opt, const std::vector<fs::path>& inputs,
                std::ostream& out) {
    const std::string csv = report_to_csv(report);
    if (opt.out.empty()) {
        out << csv;
        for (const auto& n : report.notes) out << "# " << n << "\n";
        return 0;
    }
    const fs::path target = opt.out;
    io::write_text(target, csv);
    const fs::path prov = target.parent_path() / (target.stem().string() + ".report.json");
    io::write_text(prov, report_provenance_json(report));
    write_provenance_for(target, "exp " + report.name, opt, json::object(), inputs, {target, prov});
    out << csv;
    return 0;
}

int cmd_exp(const std::string& which, const Options& opt, std::ostream& out) {
    if (which == "usage") {
        const auto sequences = io::parse_sequences(io::read_text(opt.sequences), opt.sequences);
        const std::string csv = usage_to_csv(usage_stats(sequences));
        if (!opt.out.empty()) {
            io::write_text(opt.out, csv);
            write_provenance_for(opt.out, "exp usage", opt, json::object(), {opt.sequences}, {opt.out});
        }
        out << csv;
        return 0;
    }
    if (which == "importance") {
        const io::Model model = io::read_model(opt.model);
        const auto* rf = std::get_if<RandomForestModel>(&model);
        if (!rf) throw InputError(opt.model, "$.algo", "importance needs a random forest model");
        const std::string text = importance_to_text(importance_report(*rf));
        if (!opt.out.empty()) {
            io::write_text(opt.out, text);
            write_provenance_for(opt.out, "exp importance", opt, json::object(), {opt.model}, {opt.out});
        }
        out << text;
        return 0;
    }

    const Dataset ds = io::read_dataset(opt.data);
    const ExperimentConfig cfg = experiment_config(opt);
    std::vector<fs::path> inputs{opt.data, io::encoders_path(opt.data)};
    if (which == "compare") return emit_report(compare_baselines(ds, cfg), opt, inputs, out);
    if (which == "per-task") return emit_report(per_task_models(ds, cfg), opt, inputs, out);
    if (which == "ablate") {
        if (opt.profiles.empty()) throw InputError("--profiles", "", "ablation needs --profiles");
        const auto profiles = io::parse_profiles(io::read_text(opt.profiles), opt.profiles);
        inputs.emplace_back(opt.profiles);
        return emit_report(profile_ablation(ds, profiles, cfg), opt, inputs, out);
    }
    SweepSpec spec;
    try {
        spec.parameter = parse_sweep_param(opt.param);
    } catch (const Error& e) {
        throw InputError("--param", "", e.what());
    }
    spec.repetitions = opt.reps;
    if (!opt.values.empty()) {
        spec.values = opt.values;
    } else if (opt.step != 0 || opt.from != 0 || opt.to != 0) {
        if (opt.step < 1 || opt.from < 1 || opt.to < opt.from)
            throw InputError("--from/--to/--step", "", "need 1 <= from <= to and step >= 1");
        for (int v = opt.from; v <= opt.to; v += opt.step) spec.values.push_back(v);
    } else {
        spec.values = default_sweep_values(spec.parameter);
    }
    if (spec.parameter == SweepParam::Lag && spec.values.back() > ds.lag)
        throw InputError(opt.data, "", "dataset lag " + std::to_string(ds.lag) + " is below the largest swept lag");
    return emit_report(sweep(ds, spec, cfg), opt, inputs, out);
}

// --- option wiring ------------------------------------------------------------

void add_forest_options(CLI::App* app, Options& opt) {
    app->add_option("--trees", opt.trees, "Number of trees")->capture_default_str();
    app->add_option("--max-depth", opt.max_depth, "Maximum tree depth")->capture_default_str();
    app->add_option("--mtry", opt.mtry, "Features searched per split (0: ceil(sqrt(d)))")->capture_default_str();
    app->add_option("--min-samples-split", opt.min_samples_split, "Smallest node that may split")
        ->capture_default_str();
    app->add_flag("--no-bootstrap", opt.no_bootstrap, "Train every tree on the full training set");
}

void add_mlr_options(CLI::App* app, Options& opt) {
    app->add_option("--learning-rate", opt.learning_rate, "Initial and maximum step size")->capture_default_str();
    app->add_option("--max-iters", opt.max_iters, "Maximum gradient steps")->capture_default_str();
    app->add_option("--l2", opt.l2, "L2 penalty on non-bias weights")->capture_default_str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Decision-point prediction for indoor wayfinding", "wayfind"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--jobs", opt.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", opt.seed, "Global seed (falls back to WAYFIND_SEED, then 7)");

    auto* net = app.add_subcommand("net", "Inspect a network file");
    net->require_subcommand(1);
    auto* net_validate = net->add_subcommand("validate", "Check numbering and connectivity");
    net_validate->add_option("net,--net", opt.net, "Network JSON")->required();
    auto* net_stats = net->add_subcommand("stats", "Print network counts");
    net_stats->add_option("net,--net", opt.net, "Network JSON")->required();

    auto* synth = app.add_subcommand("synth", "Generate a building, trajectories and ground truth");
    synth->add_option("--spec", opt.spec, "Building spec JSON (defaults otherwise)");
    synth->add_option("--agents", opt.agents, "Number of simulated participants")->capture_default_str();
    synth->add_option("--out-dir", opt.out_dir, "Output directory")->required();
    synth->add_option("--noise", opt.noise, "Planar position noise (m)")->capture_default_str();
    synth->add_option("--interval-ms", opt.interval_ms, "Sampling interval (ms)")->capture_default_str();
    synth->add_option("--speed", opt.speed, "Walking speed (m/s)")->capture_default_str();
    synth->add_option("--deviation-scale", opt.deviation_scale, "Multiplier on the per-task deviation rates")
        ->capture_default_str();

    auto* map = app.add_subcommand("map", "Extract decision sequences from trajectories");
    map->add_option("--net", opt.net, "Network JSON")->required();
    auto* tr = map->add_option("--transforms", opt.transforms, "Transforms JSON");
    auto* cp = map->add_option("--control-points", opt.control_points, "Control-point CSV");
    tr->excludes(cp);
    map->add_option("--z-band", opt.z_band, "Half-width of the z band fitted from control points")
        ->capture_default_str();
    map->add_option("--traj", opt.traj, "Trajectory CSV")->required();
    map->add_option("--out", opt.out, "Output sequence CSV")->required();
    map->add_option("--snap-radius", opt.snap_radius, "Snap radius (m)")->capture_default_str();

    auto* featurize = app.add_subcommand("featurize", "Build a lagged feature table");
    featurize->add_option("--sequences", opt.sequences, "Sequence CSV")->required();
    featurize->add_option("--net", opt.net, "Network JSON (encode every network node)");
    featurize->add_option("--profiles", opt.profiles, "Profile CSV (append profile features)");
    featurize->add_option("--lag", opt.lag, "Preceding decision points per sample")->capture_default_str();
    featurize->add_option("--out", opt.out, "Output dataset CSV")->required();
    featurize->add_option("--split-fraction", opt.split_fraction,
                          "Also write <out>.train/.test with this train fraction (0: no split)");

    auto* train = app.add_subcommand("train", "Train a model");
    train->add_option("--algo", opt.algo, "rf or mlr")->required()->check(CLI::IsMember({"rf", "mlr"}));
    train->add_option("--data", opt.data, "Training dataset CSV")->required();
    train->add_option("--out", opt.out, "Output model JSON")->required();
    add_forest_options(train, opt);
    add_mlr_options(train, opt);

    auto* eval = app.add_subcommand("eval", "Evaluate a model");
    eval->add_option("--model", opt.model, "Model JSON")->required();
    eval->add_option("--data", opt.data, "Test dataset CSV")->required();
    eval->add_option("--profiles", opt.profiles, "Profile CSV for grouping");
    eval->add_option("--group-by", opt.group_by, "none, task, gender, device, familiarity, ...")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "task", "gender", "device", "familiarity", "education", "vr_experience",
                               "gaming_experience", "building_familiarity", "evacuation_experience"}));
    eval->add_option("--out", opt.out, "Report JSON");
    eval->add_option("--per-node", opt.per_node, "Per-node recall CSV");

    auto* exp = app.add_subcommand("exp", "Run an experiment");
    exp->require_subcommand(1);
    std::map<std::string, CLI::App*> experiments;
    for (const char* name : {"compare", "per-task", "ablate", "sweep"}) {
        auto* sub = exp->add_subcommand(name);
        sub->add_option("--data", opt.data, "Dataset CSV")->required();
        sub->add_option("--out", opt.out, "Report CSV (stdout otherwise)");
        sub->add_option("--split-fraction", opt.split_fraction, "Train fraction")->capture_default_str();
        add_forest_options(sub, opt);
        experiments[name] = sub;
    }
    experiments["compare"]->description("RF against MLR on one split");
    experiments["per-task"]->description("One forest per task");
    experiments["ablate"]->description("With and without profile features");
    experiments["ablate"]->add_option("--profiles", opt.profiles, "Profile CSV")->required();
    add_mlr_options(experiments["compare"], opt);
    auto* sw = experiments["sweep"];
    sw->description("Retrain over a parameter grid");
    sw->add_option("--param", opt.param, "max_depth, n_trees or lag")->required();
    sw->add_option("--from", opt.from, "First value");
    sw->add_option("--to", opt.to, "Last value");
    sw->add_option("--step", opt.step, "Increment");
    sw->add_option("--values", opt.values, "Explicit values");
    sw->add_option("--reps", opt.reps, "Repetitions per value")->capture_default_str();
    auto* usage = exp->add_subcommand("usage", "Node usage and sequence lengths");
    usage->add_option("--sequences", opt.sequences, "Sequence CSV")->required();
    usage->add_option("--out", opt.out, "Output CSV");
    experiments["usage"] = usage;
    auto* importance = exp->add_subcommand("importance", "F-score and top-level split features");
    importance->add_option("--model", opt.model, "Random forest model JSON")->required();
    importance->add_option("--out", opt.out, "Output text");
    experiments["importance"] = importance;

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        report_error(err, 2, "", "", e.what());
        return 2;
    }

    try {
        if (seed_opt->count() == 0) {
            if (const char* env = std::getenv("WAYFIND_SEED")) opt.seed = parse_seed_text(env, "WAYFIND_SEED");
        }
        if (net_validate->parsed()) return cmd_net_validate(opt, out);
        if (net_stats->parsed()) return cmd_net_stats(opt, out);
        if (synth->parsed()) return cmd_synth(opt, out, err);
        if (map->parsed()) {
            if (opt.transforms.empty() && opt.control_points.empty())
                throw InputError("map", "", "one of --transforms or --control-points is required");
            return cmd_map(opt, out, err);
        }
        if (featurize->parsed()) return cmd_featurize(opt, out);
        if (train->parsed()) return cmd_train(opt, out);
        if (eval->parsed()) return cmd_eval(opt, out);
        for (const auto& [name, sub] : experiments)
            if (sub->parsed()) return cmd_exp(name, opt, out);
        report_error(err, 2, "", "", "no command given");
        return 2;
    } catch (const InputError& e) {
        report_error(err, 2, e.source(), e.location(), e.detail());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        report_error(err, 2, "", "", e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error(err, 1, "", "", e.what());
        return 1;
    }
}

} // namespace wayfind::cli
