#pragma once

#include "wayfind/indoor_network.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wayfind {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// A surveyed point known in both frames: virtual-environment coordinates and
/// the network map (meters) on a given level.
struct ControlPointPair {
    int level = 0;
    Point3 virtual_point;
    Point2 map_point;
};

/// Planar similarity transform virtual -> map for one level:
///   map = scale * R(rotation) * virtual + (tx, ty)
/// plus the half-open band [z_min, z_max) of virtual z assigned to the level.
struct FloorTransform {
    int level = 0;
    double scale = 1.0;
    double rotation = 0.0; ///< radians, normalized to [0, 2*pi)
    double tx = 0.0;
    double ty = 0.0;
    double z_min = -std::numeric_limits<double>::infinity();
    double z_max = std::numeric_limits<double>::infinity();
    /// Fit residuals in map meters (zero for hand-built transforms).
    double rms_residual = 0.0;
    double max_residual = 0.0;

    Point2 apply(Point2 v) const;
    Point2 invert(Point2 m) const;
};

/// Least-squares similarity fit over the pairs on `level` (other levels are
/// ignored). Throws Error with fewer than two pairs or when the virtual (or
/// map) points all coincide.
FloorTransform estimate_transform(std::span<const ControlPointPair> pairs, int level);

/// Level whose z band contains z. Throws Error when none (or more than one)
/// does.
int assign_level(double z, std::span<const FloorTransform> transforms);

/// Non-throwing variant used while scanning trajectories.
std::optional<int> find_level(double z, std::span<const FloorTransform> transforms);

/// Throws InputError if two bands overlap, a band is empty, or a level repeats.
void check_transform_table(std::span<const FloorTransform> transforms);

struct MappedPoint {
    Point2 map;
    int level = 0;
};

MappedPoint map_point(Point3 p, std::span<const FloorTransform> transforms);

struct HeadPose {
    double yaw = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
};

struct TrajectorySample {
    std::int64_t t_ms = 0;
    Point3 position;
    HeadPose head;
    Point3 gaze;
};

struct Trajectory {
    std::string participant;
    int task = 1;
    std::vector<TrajectorySample> samples;
};

struct DecisionSequence {
    std::string participant;
    int task = 1;
    std::vector<NodeId> nodes;

    friend bool operator==(const DecisionSequence&, const DecisionSequence&) = default;
};

struct MappingConfig {
    double snap_radius = 2.0;
    bool warn_on_nonadjacent = true;
};

/// Nearest node on `level` within the snap radius. Distances equal within
/// 1e-12 resolve to the lexicographically smallest label.
std::optional<NodeId> snap_to_node(Point2 p, int level, const IndoorNetwork& net, const MappingConfig& cfg);

struct ExtractionResult {
    DecisionSequence sequence;
    std::vector<std::string> warnings;
};

/// Maps every sample to the network, snaps it, drops unmatched samples and
/// collapses runs of the same node. Samples whose z falls between level
/// bands are dropped. Throws Error on an empty trajectory, a task outside
/// 1..4, decreasing timestamps or a non-positive snap radius.
ExtractionResult extract_decision_sequence(const Trajectory& traj, const IndoorNetwork& net,
                                           std::span<const FloorTransform> transforms,
                                           const MappingConfig& cfg);

} // namespace wayfind
