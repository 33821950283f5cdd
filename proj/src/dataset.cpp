#include "wayfind/dataset.hpp"

#include "wayfind/error.hpp"
#include "wayfind/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wayfind {

LabelEncoder LabelEncoder::fit(std::span<const std::string> categories) {
    if (categories.empty()) throw Error("cannot fit a label encoder on an empty category list");
    LabelEncoder enc;
    enc.categories_.assign(categories.begin(), categories.end());
    std::sort(enc.categories_.begin(), enc.categories_.end());
    enc.categories_.erase(std::unique(enc.categories_.begin(), enc.categories_.end()), enc.categories_.end());
    for (std::size_t i = 0; i < enc.categories_.size(); ++i) enc.codes_.emplace(enc.categories_[i], static_cast<int>(i));
    return enc;
}

std::optional<int> LabelEncoder::try_encode(const std::string& category) const {
    const auto it = codes_.find(category);
    if (it == codes_.end()) return std::nullopt;
    return it->second;
}

int LabelEncoder::encode(const std::string& category) const {
    if (auto code = try_encode(category)) return *code;
    throw Error("unknown category '" + category + "'");
}

const std::string& LabelEncoder::decode(int code) const {
    if (code < 0 || static_cast<std::size_t>(code) >= categories_.size())
        throw Error("code " + std::to_string(code) + " outside encoder range");
    return categories_[static_cast<std::size_t>(code)];
}

const std::string& profile_category(const PersonProfile& p, std::string_view field) {
    if (field == "gender") return p.gender;
    if (field == "education") return p.education;
    if (field == "vr_experience") return p.vr_experience;
    if (field == "gaming_experience") return p.gaming_experience;
    if (field == "building_familiarity") return p.building_familiarity;
    if (field == "evacuation_experience") return p.evacuation_experience;
    if (field == "device") return p.device;
    throw Error("'" + std::string(field) + "' is not a categorical profile field");
}

namespace {

bool is_numeric_field(std::string_view field) { return field == "age" || field == "height"; }

} // namespace

ProfileEncoders fit_profile_encoders(const std::map<std::string, PersonProfile>& profiles) {
    if (profiles.empty()) throw Error("no participant profiles");
    ProfileEncoders out;
    for (const char* field : kProfileFields) {
        if (is_numeric_field(field)) continue;
        std::vector<std::string> values;
        for (const auto& [who, p] : profiles) values.push_back(profile_category(p, field));
        out.emplace(field, LabelEncoder::fit(values));
    }
    return out;
}

std::vector<std::string> lagged_feature_names(int lag) {
    std::vector<std::string> names{"task"};
    for (int k = 1; k <= lag; ++k) names.push_back("prev_" + std::to_string(k));
    return names;
}

std::vector<Sample> make_lagged_samples(const DecisionSequence& seq, int lag, const LabelEncoder& node_encoder) {
    if (lag < 1) throw Error("lag must be >= 1");
    std::vector<Sample> out;
    if (seq.nodes.size() < 2) return out;
    std::vector<int> codes;
    codes.reserve(seq.nodes.size());
    for (const auto& id : seq.nodes) codes.push_back(node_encoder.encode(id));
    for (std::size_t t = 1; t < codes.size(); ++t) {
        Sample s;
        s.participant = seq.participant;
        s.task = seq.task;
        s.target = codes[t];
        s.features.reserve(static_cast<std::size_t>(lag) + 1);
        s.features.push_back(seq.task);
        for (std::size_t k = 1; k <= static_cast<std::size_t>(lag); ++k)
            s.features.push_back(k <= t ? static_cast<double>(codes[t - k]) : kStartCode);
        out.push_back(std::move(s));
    }
    return out;
}

Dataset build_dataset(std::span<const DecisionSequence> sequences, int lag, std::optional<LabelEncoder> node_encoder) {
    Dataset ds;
    ds.lag = lag;
    ds.feature_names = lagged_feature_names(lag);
    if (node_encoder) {
        ds.node_encoder = std::move(*node_encoder);
    } else {
        std::vector<std::string> labels;
        for (const auto& seq : sequences) labels.insert(labels.end(), seq.nodes.begin(), seq.nodes.end());
        if (labels.empty()) throw Error("no decision points in any sequence");
        ds.node_encoder = LabelEncoder::fit(labels);
    }
    for (const auto& seq : sequences) {
        auto samples = make_lagged_samples(seq, lag, ds.node_encoder);
        std::move(samples.begin(), samples.end(), std::back_inserter(ds.samples));
    }
    return ds;
}

std::vector<Sample> attach_profiles(std::span<const Sample> samples,
                                    const std::map<std::string, PersonProfile>& profiles,
                                    const ProfileEncoders& encoders) {
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        const auto it = profiles.find(s.participant);
        if (it == profiles.end()) throw Error("no profile for participant '" + s.participant + "'");
        const PersonProfile& p = it->second;
        Sample extended = s;
        for (const char* field : kProfileFields) {
            const std::string_view name = field;
            if (name == "age") {
                extended.features.push_back(p.age);
            } else if (name == "height") {
                extended.features.push_back(p.height);
            } else {
                const auto enc = encoders.find(field);
                if (enc == encoders.end()) throw Error(std::string("no encoder for profile field ") + field);
                extended.features.push_back(enc->second.encode(profile_category(p, name)));
            }
        }
        out.push_back(std::move(extended));
    }
    return out;
}

Dataset with_profiles(const Dataset& ds, const std::map<std::string, PersonProfile>& profiles) {
    if (ds.has_profiles()) throw Error("dataset already carries profile features");
    Dataset out;
    out.lag = ds.lag;
    out.node_encoder = ds.node_encoder;
    out.profile_encoders = fit_profile_encoders(profiles);
    out.feature_names = ds.feature_names;
    for (const char* field : kProfileFields) out.feature_names.emplace_back(field);
    out.samples = attach_profiles(ds.samples, profiles, out.profile_encoders);
    return out;
}

Dataset truncate_lag(const Dataset& ds, int lag) {
    if (lag < 1 || lag > ds.lag)
        throw Error("cannot derive lag " + std::to_string(lag) + " from a lag-" + std::to_string(ds.lag) + " dataset");
    Dataset out;
    out.lag = lag;
    out.node_encoder = ds.node_encoder;
    out.profile_encoders = ds.profile_encoders;
    out.feature_names = lagged_feature_names(lag);
    const auto head = static_cast<std::ptrdiff_t>(lag) + 1;
    const auto tail_from = static_cast<std::ptrdiff_t>(ds.lag) + 1;
    out.feature_names.insert(out.feature_names.end(), ds.feature_names.begin() + tail_from, ds.feature_names.end());
    out.samples.reserve(ds.samples.size());
    for (const Sample& s : ds.samples) {
        Sample t = s;
        t.features.assign(s.features.begin(), s.features.begin() + head);
        t.features.insert(t.features.end(), s.features.begin() + tail_from, s.features.end());
        out.samples.push_back(std::move(t));
    }
    return out;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
    Dataset out;
    out.lag = ds.lag;
    out.node_encoder = ds.node_encoder;
    out.profile_encoders = ds.profile_encoders;
    out.feature_names = ds.feature_names;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(ds.samples.at(i));
    return out;
}

FeatureMatrix FeatureMatrix::from(const Dataset& ds) {
    FeatureMatrix m;
    m.rows = ds.size();
    m.cols = ds.n_features();
    m.values.reserve(m.rows * m.cols);
    m.targets.reserve(m.rows);
    for (const Sample& s : ds.samples) {
        if (s.features.size() != m.cols)
            throw Error("sample has " + std::to_string(s.features.size()) + " features, schema has " +
                        std::to_string(m.cols));
        m.values.insert(m.values.end(), s.features.begin(), s.features.end());
        m.targets.push_back(s.target);
    }
    return m;
}

Split split(const Dataset& ds, const SplitConfig& cfg) {
    const std::size_t n = ds.size();
    if (n < 2) throw Error("need at least 2 samples to split, got " + std::to_string(n));
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) throw Error("train fraction must lie in (0, 1)");
    const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n)
        throw Error("train fraction " + std::to_string(cfg.train_fraction) + " leaves an empty partition for n = " +
                    std::to_string(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RandomStream rng(cfg.seed);
    rng.shuffle(std::span<std::size_t>(order));

    Split out;
    out.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(out.train_indices.begin(), out.train_indices.end());
    std::sort(out.test_indices.begin(), out.test_indices.end());
    out.train = subset(ds, out.train_indices);
    out.test = subset(ds, out.test_indices);
    return out;
}

} // namespace wayfind
