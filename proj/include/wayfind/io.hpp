#pragma once

#include "wayfind/dataset.hpp"
#include "wayfind/geo_mapping.hpp"
#include "wayfind/indoor_network.hpp"
#include "wayfind/logistic.hpp"
#include "wayfind/random_forest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

/// File formats. Tables are comma-separated with a header row; documents are
/// JSON carrying a format version. Readers throw InputError naming the file
/// and the line (tables, JSON syntax) or JSON path (document schema).
namespace wayfind::io {

inline constexpr int kFormatVersion = 1;

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// 64-bit FNV-1a, rendered as 16 hex digits by digest().
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

// --- networks ---------------------------------------------------------------

NetworkDescription parse_network(std::string_view text, const std::string& source = "<memory>");
IndoorNetwork read_network(const std::filesystem::path& path);
std::string network_to_json(const IndoorNetwork& net);

// --- transforms and control points -----------------------------------------

std::vector<FloorTransform> parse_transforms(std::string_view text, const std::string& source = "<memory>");
std::vector<FloorTransform> read_transforms(const std::filesystem::path& path);
std::string transforms_to_json(std::span<const FloorTransform> transforms);

std::vector<ControlPointPair> parse_control_points(std::string_view text, const std::string& source = "<memory>");
std::string control_points_to_csv(std::span<const ControlPointPair> pairs);

/// One transform per level present in the pairs, with a z band of
/// +-half_band around the mean virtual z of the level's control points.
std::vector<FloorTransform> transforms_from_control_points(std::span<const ControlPointPair> pairs,
                                                           double half_band);

// --- trajectories, sequences, profiles ---------------------------------------

/// Rows are grouped into trajectories by (participant, task) in order of
/// first appearance.
std::vector<Trajectory> parse_trajectories(std::string_view text, const std::string& source = "<memory>");
std::string trajectories_to_csv(std::span<const Trajectory> trajectories);

std::vector<DecisionSequence> parse_sequences(std::string_view text, const std::string& source = "<memory>");
std::string sequences_to_csv(std::span<const DecisionSequence> sequences);

std::map<std::string, PersonProfile> parse_profiles(std::string_view text, const std::string& source = "<memory>");
std::string profiles_to_csv(const std::map<std::string, PersonProfile>& profiles);

// --- datasets ---------------------------------------------------------------

/// Sidecar path holding the encoders and schema of a dataset table.
std::filesystem::path encoders_path(const std::filesystem::path& table);

std::string dataset_to_csv(const Dataset& ds);
std::string dataset_schema_json(const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

/// Digest of the dataset's table and schema text.
std::string dataset_hash(const Dataset& ds);

// --- models -----------------------------------------------------------------

using Model = std::variant<RandomForestModel, LogisticModel>;

std::string model_to_json(const Model& model);
Model parse_model(std::string_view text, const std::string& source = "<memory>");
Model read_model(const std::filesystem::path& path);

} // namespace wayfind::io
