#pragma once

#include "wayfind/dataset.hpp"
#include "wayfind/geo_mapping.hpp"
#include "wayfind/indoor_network.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wayfind {

/// Layout of the synthetic multi-story building.
///
/// Each level has two long corridors (odd and even numbers), staircase shafts
/// between them, a few cross corridors, exits on the ground level and one
/// room-access node ("<top>99") at the east end of the top level. Node count:
/// n_levels * (2 * nodes_per_corridor + n_stair_shafts) + n_exits + 1.
struct BuildingSpec {
    int n_levels = 4;
    double corridor_length_m = 214.0;
    double corridor_width_m = 12.0;
    int nodes_per_corridor = 13;
    int n_stair_shafts = 5;
    int n_exits = 8;
    /// When set, the layout must produce exactly this many nodes.
    std::optional<int> target_nodes = 133;
    double floor_height_m = 4.0;
};

/// Number of nodes the spec produces.
int building_node_count(const BuildingSpec& spec);

/// Throws Error when the spec is unrealizable (including a target_nodes
/// mismatch, reported with the achievable count).
IndoorNetwork build_paper_building(const BuildingSpec& spec);

struct TaskSpec {
    int task_id = 1;
    NodeId origin;
    std::optional<NodeId> destination; ///< nullopt: any exit
    std::optional<double> deviation_prob; ///< overrides AgentPolicy::deviation_prob
};

/// Four tasks on the default building: 402 -> 499, 499 -> 201, 201 -> 418,
/// 418 -> any exit, with per-task deviation rates calibrated so the mean
/// sequence lengths order task 2 > task 1 > task 3 > task 4.
std::vector<TaskSpec> default_tasks(const BuildingSpec& spec = {});

/// One-step Markov walker: with probability deviation_prob move to a random
/// neighbor (weight exp(-revisit_penalty * visits)), otherwise take the
/// smallest-labelled next hop on a shortest path.
struct AgentPolicy {
    double deviation_prob = 0.15;
    double revisit_penalty = 1.0;
    std::uint64_t seed = 7;
    int step_cap = 400;
};

std::string participant_id(int agent_index, int n_agents);

struct GeneratedSequences {
    std::vector<DecisionSequence> sequences; ///< agent-major, task order as given
    std::vector<std::string> warnings;       ///< agents that hit the step cap
};

/// Ground-truth decision sequences for n_agents x tasks. Each (agent, task)
/// uses its own stream derived from (seed, agent, task), so the output does
/// not depend on `jobs`. Throws Error when a task is not realizable.
GeneratedSequences generate_sequences(const IndoorNetwork& net, std::span<const TaskSpec> tasks,
                                      const AgentPolicy& policy, int n_agents, int jobs = 1);

struct SynthConfig {
    int n_agents = 70;
    int sample_interval_ms = 10;
    double walk_speed_mps = 1.4;
    double position_noise_m = 0.0;
    double floor_height_m = 4.0;
    std::uint64_t seed = 7;
    /// Virtual -> map transform per level; samples are produced through the
    /// inverse. Empty: default_virtual_frame().
    std::vector<FloorTransform> virtual_frame;
};

/// A rotated, scaled and shifted frame per level, with z bands of a quarter
/// floor height around each floor elevation.
std::vector<FloorTransform> default_virtual_frame(const IndoorNetwork& net, double floor_height_m);

/// Virtual elevation of a level (rank * floor height).
double level_elevation(const IndoorNetwork& net, int level, double floor_height_m);

/// Four floor-corner control points per level, measured in both frames.
std::vector<ControlPointPair> corner_control_points(const IndoorNetwork& net, std::span<const FloorTransform> frame,
                                                   const BuildingSpec& spec);

/// Walks each sequence at constant speed through its node positions (stairs
/// climb one floor height per flight), samples every interval, adds planar
/// Gaussian noise and maps into the virtual frame. The noise stream of a
/// sequence is keyed by (seed, participant, task).
std::vector<Trajectory> sequences_to_trajectories(std::span<const DecisionSequence> sequences,
                                                  const IndoorNetwork& net, const SynthConfig& cfg, int jobs = 1);

/// Questionnaire-style profiles with category frequencies of the reference
/// study's participant table.
std::map<std::string, PersonProfile> generate_profiles(std::span<const std::string> participants, std::uint64_t seed);

} // namespace wayfind
