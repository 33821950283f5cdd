#pragma once

#include "wayfind/geo_mapping.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wayfind {

/// Bijection between category strings and codes 0..n-1, assigned in sorted
/// category order so that the same category set always yields the same codes.
class LabelEncoder {
public:
    LabelEncoder() = default;

    /// Throws Error on an empty input. Duplicates are folded.
    static LabelEncoder fit(std::span<const std::string> categories);

    /// Throws Error for an unseen category.
    int encode(const std::string& category) const;
    std::optional<int> try_encode(const std::string& category) const;
    /// Throws Error for a code outside 0..size()-1.
    const std::string& decode(int code) const;

    std::size_t size() const noexcept { return categories_.size(); }
    const std::vector<std::string>& categories() const noexcept { return categories_; }

    friend bool operator==(const LabelEncoder& a, const LabelEncoder& b) { return a.categories_ == b.categories_; }

private:
    std::vector<std::string> categories_;
    std::unordered_map<std::string, int> codes_;
};

/// Feature value for lag positions that precede the start of a sequence.
inline constexpr double kStartCode = -1.0;

struct PersonProfile {
    std::string gender;
    double age = 0.0;
    double height = 0.0;
    std::string education;
    std::string vr_experience;
    std::string gaming_experience;
    std::string building_familiarity;
    std::string evacuation_experience;
    std::string device;
};

/// Profile fields in feature order.
inline constexpr std::array<const char*, 9> kProfileFields = {
    "gender",           "age",
    "height",           "education",
    "vr_experience",    "gaming_experience",
    "building_familiarity", "evacuation_experience",
    "device"};

/// Value of a categorical profile field by name ("age"/"height" are numeric
/// and not accepted here). Throws Error for an unknown field.
const std::string& profile_category(const PersonProfile& profile, std::string_view field);

using ProfileEncoders = std::map<std::string, LabelEncoder>;

ProfileEncoders fit_profile_encoders(const std::map<std::string, PersonProfile>& profiles);

struct Sample {
    std::vector<double> features;
    int target = 0;
    std::string participant;
    int task = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
    std::vector<Sample> samples;
    LabelEncoder node_encoder;
    ProfileEncoders profile_encoders;
    std::vector<std::string> feature_names;
    int lag = 1;

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t n_features() const noexcept { return feature_names.size(); }
    int n_classes() const noexcept { return static_cast<int>(node_encoder.size()); }
    bool has_profiles() const noexcept { return !profile_encoders.empty(); }
};

/// Dense row-major view of a dataset used by the trainers.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<int> targets;

    static FeatureMatrix from(const Dataset& ds);
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

/// One sample per position t >= 1: features [task, code(node[t-1]), ...,
/// code(node[t-lag])] with kStartCode before the sequence start, target
/// code(node[t]). Throws Error for lag < 1.
std::vector<Sample> make_lagged_samples(const DecisionSequence& seq, int lag, const LabelEncoder& node_encoder);

std::vector<std::string> lagged_feature_names(int lag);

/// Encodes all sequences. With no encoder given, one is fitted over every
/// label occurring in the sequences.
Dataset build_dataset(std::span<const DecisionSequence> sequences, int lag,
                      std::optional<LabelEncoder> node_encoder = std::nullopt);

/// Appends the nine profile fields (categoricals label-coded, age and height
/// raw). Throws Error when a participant has no profile.
std::vector<Sample> attach_profiles(std::span<const Sample> samples,
                                    const std::map<std::string, PersonProfile>& profiles,
                                    const ProfileEncoders& encoders);

/// Dataset with profile features appended and encoders recorded.
Dataset with_profiles(const Dataset& ds, const std::map<std::string, PersonProfile>& profiles);

/// Keeps only the first `lag` lag positions (profile features, if any,
/// are kept). Throws Error when `lag` exceeds the dataset's lag.
Dataset truncate_lag(const Dataset& ds, int lag);

/// Subset by sample index, sharing encoders and schema.
Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

struct SplitConfig {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct Split {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_indices; ///< ascending
    std::vector<std::size_t> test_indices;  ///< ascending
};

/// Random train/test partition with |train| = round(fraction * n).
/// Throws Error with fewer than 2 samples or when a side would be empty.
Split split(const Dataset& ds, const SplitConfig& cfg);

} // namespace wayfind
