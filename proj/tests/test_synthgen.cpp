#include <doctest.h>

#include "wayfind/error.hpp"
#include "wayfind/experiments.hpp"
#include "wayfind/io.hpp"
#include "wayfind/synthgen.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace wayfind;

namespace {

const IndoorNetwork& building() {
    static const IndoorNetwork net = build_paper_building({});
    return net;
}

} // namespace

TEST_CASE("default building") {
    const auto& net = building();
    CHECK(net.size() == 133);
    CHECK(building_node_count({}) == 133);
    CHECK(net.count(NodeKind::Staircase) == 20);
    CHECK(net.count(NodeKind::Exit) == 8);
    CHECK(validate_numbering(net).empty());
    CHECK(net.is_connected());
    CHECK(net.levels() == std::vector<int>{1, 2, 3, 4});
    CHECK(net.ground_level() == 1);
    for (const Node& n : net.nodes())
        if (n.kind == NodeKind::Exit) CHECK(n.level == 1);
    for (const Link& l : net.links()) {
        const Node& a = net.node(l.a);
        const Node& b = net.node(l.b);
        if (l.kind == LinkKind::SameLevel) CHECK(a.level == b.level);
        else CHECK(std::abs(a.level - b.level) <= 1);
    }
    // catchments stay disjoint for the default snap radius
    for (int level : net.levels()) CHECK(net.min_node_spacing(level) > 2 * MappingConfig{}.snap_radius);
    for (const char* id : {"402", "499", "201", "418"}) CHECK(net.contains(id));
}

TEST_CASE("building spec variants") {
    BuildingSpec spec;
    spec.target_nodes = 140;
    CHECK_THROWS_WITH_AS(build_paper_building(spec), doctest::Contains("133"), Error);

    BuildingSpec flat;
    flat.n_levels = 1;
    flat.n_exits = 4;
    flat.target_nodes.reset();
    const auto net = build_paper_building(flat);
    CHECK(static_cast<int>(net.size()) == building_node_count(flat));
    CHECK(net.count(LinkKind::StairStair) == 0);
    CHECK(validate_numbering(net).empty());
    CHECK(net.is_connected());

    BuildingSpec ten_exits;
    ten_exits.n_exits = 10;
    ten_exits.target_nodes.reset();
    const auto net10 = build_paper_building(ten_exits);
    CHECK(net10.count(NodeKind::Exit) == 10);
    CHECK(validate_numbering(net10).empty());
}

TEST_CASE("zero deviation follows the shortest path") {
    const auto& net = building();
    auto tasks = default_tasks();
    for (auto& t : tasks) t.deviation_prob = 0.0;
    const auto gen = generate_sequences(net, tasks, AgentPolicy{}, 3);
    REQUIRE(gen.sequences.size() == 12);
    for (const auto& s : gen.sequences) {
        const TaskSpec& task = tasks[static_cast<std::size_t>(s.task - 1)];
        CHECK(s.nodes.front() == task.origin);
        if (task.destination) CHECK(s.nodes == net.shortest_path(task.origin, *task.destination));
        else CHECK(net.node(s.nodes.back()).kind == NodeKind::Exit);
    }
}

TEST_CASE("generated sequences are valid walks") {
    const auto& net = building();
    const auto tasks = default_tasks();
    const auto gen = generate_sequences(net, tasks, AgentPolicy{}, 10, 1);
    const auto again = generate_sequences(net, tasks, AgentPolicy{}, 10, 3);
    CHECK(gen.sequences == again.sequences);
    for (const auto& s : gen.sequences) {
        CHECK(s.nodes.size() >= 2);
        for (std::size_t i = 1; i < s.nodes.size(); ++i) CHECK(net.adjacent(s.nodes[i - 1], s.nodes[i]));
        const TaskSpec& task = tasks[static_cast<std::size_t>(s.task - 1)];
        if (task.destination) CHECK(s.nodes.back() == *task.destination);
    }
    CHECK(gen.sequences.front().participant == participant_id(0, 10));
    CHECK(participant_id(0, 70) == "P01");
    CHECK(participant_id(69, 70) == "P70");

    std::vector<TaskSpec> bad{{1, "402", NodeId("nowhere"), std::nullopt}};
    CHECK_THROWS_AS(generate_sequences(net, bad, AgentPolicy{}, 1), Error);
}

TEST_CASE("mean sequence lengths keep the task ordering") {
    const auto gen = generate_sequences(building(), default_tasks(), AgentPolicy{}, 70);
    const auto stats = usage_stats(gen.sequences);
    CHECK(stats.lengths.at(2).mean > stats.lengths.at(1).mean);
    CHECK(stats.lengths.at(1).mean > stats.lengths.at(3).mean);
    CHECK(stats.lengths.at(3).mean > stats.lengths.at(4).mean);
}

TEST_CASE("noiseless trajectories map back to ground truth") {
    const auto& net = building();
    const auto gen = generate_sequences(net, default_tasks(), AgentPolicy{}, 4);
    SynthConfig cfg;
    cfg.sample_interval_ms = 50;
    const auto frame = default_virtual_frame(net, cfg.floor_height_m);
    CHECK_NOTHROW(check_transform_table(frame));
    const auto trajectories = sequences_to_trajectories(gen.sequences, net, cfg);
    REQUIRE(trajectories.size() == gen.sequences.size());

    const auto fitted = io::transforms_from_control_points(
        corner_control_points(net, frame, BuildingSpec{}), cfg.floor_height_m / 4);
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& t = trajectories[i];
        CHECK(t.participant == gen.sequences[i].participant);
        for (std::size_t k = 1; k < t.samples.size(); ++k) CHECK(t.samples[k].t_ms - t.samples[k - 1].t_ms == 50);
        CHECK(extract_decision_sequence(t, net, frame, {}).sequence == gen.sequences[i]);
        CHECK(extract_decision_sequence(t, net, fitted, {}).sequence == gen.sequences[i]);
    }
}

TEST_CASE("noisy trajectories are reproducible and keyed by participant") {
    const auto& net = building();
    const auto gen = generate_sequences(net, default_tasks(), AgentPolicy{}, 3);
    SynthConfig cfg;
    cfg.sample_interval_ms = 100;
    cfg.position_noise_m = 0.3;
    const auto a = sequences_to_trajectories(gen.sequences, net, cfg, 1);
    const auto b = sequences_to_trajectories(gen.sequences, net, cfg, 2);
    CHECK(io::trajectories_to_csv(a) == io::trajectories_to_csv(b));

    const std::vector<DecisionSequence> last{gen.sequences.back()};
    const auto alone = sequences_to_trajectories(last, net, cfg);
    CHECK(io::trajectories_to_csv(alone) == io::trajectories_to_csv(std::vector<Trajectory>{a.back()}));
}

TEST_CASE("profiles") {
    std::vector<std::string> ids;
    for (int i = 0; i < 70; ++i) ids.push_back(participant_id(i, 70));
    const auto p = generate_profiles(ids, 7);
    CHECK(p.size() == 70);
    CHECK(io::profiles_to_csv(p) == io::profiles_to_csv(generate_profiles(ids, 7)));
    std::set<std::string> devices;
    for (const auto& [id, prof] : p) {
        devices.insert(prof.device);
        CHECK(prof.age > 0);
        CHECK(prof.height > 0);
    }
    CHECK(devices.size() == 2);
}
