#include "wayfind/synthgen.hpp"

#include "wayfind/error.hpp"
#include "wayfind/io.hpp"
#include "wayfind/parallel.hpp"
#include "wayfind/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

namespace wayfind {

namespace {

std::string corridor_label(int level, int index, bool odd) {
    return std::to_string(level * 100 + 2 * index + (odd ? 1 : 2));
}

std::string stair_label(int shaft, int level) {
    return std::string(1, static_cast<char>('A' + shaft)) + std::to_string(level);
}

/// Corridor index of each stair shaft, spread along the building and kept off
/// the two ends.
std::vector<int> stair_indices(const BuildingSpec& spec) {
    std::vector<int> out;
    for (int s = 0; s < spec.n_stair_shafts; ++s)
        out.push_back(static_cast<int>(std::floor((s + 0.5) * spec.nodes_per_corridor / spec.n_stair_shafts)));
    return out;
}

} // namespace

int building_node_count(const BuildingSpec& spec) {
    return spec.n_levels * (2 * spec.nodes_per_corridor + spec.n_stair_shafts) + spec.n_exits + 1;
}

IndoorNetwork build_paper_building(const BuildingSpec& spec) {
    if (spec.n_levels < 1 || spec.n_levels > 9) throw Error("n_levels must be in 1..9");
    if (spec.nodes_per_corridor < 2 || spec.nodes_per_corridor > 49) throw Error("nodes_per_corridor must be in 2..49");
    if (spec.n_stair_shafts < 0 || spec.n_stair_shafts > 5) throw Error("n_stair_shafts must be in 0..5 (shafts A-E)");
    if (spec.n_exits < 1 || spec.n_exits > 10) throw Error("n_exits must be in 1..10");
    if (!(spec.corridor_length_m > 0) || !(spec.corridor_width_m > 0)) throw Error("building dimensions must be positive");
    const int count = building_node_count(spec);
    if (spec.target_nodes && *spec.target_nodes != count)
        throw Error("building spec cannot realize " + std::to_string(*spec.target_nodes) +
                    " nodes; this layout yields " + std::to_string(count));

    const auto stairs = stair_indices(spec);
    const std::set<int> stair_set(stairs.begin(), stairs.end());
    if (static_cast<int>(stair_set.size()) != spec.n_stair_shafts)
        throw Error("too few corridor nodes to place " + std::to_string(spec.n_stair_shafts) + " stair shafts apart");

    const int npc = spec.nodes_per_corridor;
    const double spacing = spec.corridor_length_m / npc;
    const double width = spec.corridor_width_m;
    const double y_odd = 0.1 * width;
    const double y_even = 0.9 * width;
    const double y_mid = 0.5 * width;
    const auto x_at = [&](int i) { return (i + 0.5) * spacing; };
    // stairs sit east of their corridor nodes so every link is longer than
    // two snap radii plus noise
    const auto stair_x = [&](int i) { return x_at(i) + 0.25 * spacing; };

    NetworkDescription d;
    const int ground = 1;
    for (int level = 1; level <= spec.n_levels; ++level) d.levels.push_back(level);
    d.ground_level = ground;

    std::set<int> cross{0, npc - 1};
    for (int i = 2; i < npc; i += 4) cross.insert(i);
    for (int i : stairs) cross.erase(i);

    for (int level = 1; level <= spec.n_levels; ++level) {
        for (int i = 0; i < npc; ++i) {
            d.nodes.push_back({corridor_label(level, i, true), level, NodeKind::CorridorJunction, {x_at(i), y_odd},
                               Corridor::Odd});
            d.nodes.push_back({corridor_label(level, i, false), level, NodeKind::CorridorJunction, {x_at(i), y_even},
                               Corridor::Even});
            if (i > 0) {
                d.links.push_back({corridor_label(level, i - 1, true), corridor_label(level, i, true), LinkKind::SameLevel});
                d.links.push_back(
                    {corridor_label(level, i - 1, false), corridor_label(level, i, false), LinkKind::SameLevel});
            }
            if (cross.contains(i))
                d.links.push_back({corridor_label(level, i, true), corridor_label(level, i, false), LinkKind::SameLevel});
        }
        for (int s = 0; s < spec.n_stair_shafts; ++s) {
            const int i = stairs[static_cast<std::size_t>(s)];
            const std::string id = stair_label(s, level);
            d.nodes.push_back({id, level, NodeKind::Staircase, {stair_x(i), y_mid}, Corridor::None});
            d.links.push_back({id, corridor_label(level, i, true), LinkKind::StairAccess});
            d.links.push_back({id, corridor_label(level, i, false), LinkKind::StairAccess});
            if (level > 1) d.links.push_back({stair_label(s, level - 1), id, LinkKind::StairStair});
        }
    }

    // destination room at the east end of the top level
    const int top = spec.n_levels;
    const std::string room = std::to_string(top * 100 + 99);
    d.nodes.push_back({room, top, NodeKind::RoomAccess, {x_at(npc - 1) + 0.45 * spacing, y_mid}, Corridor::None});
    d.links.push_back({room, corridor_label(top, npc - 1, true), LinkKind::SameLevel});
    d.links.push_back({room, corridor_label(top, npc - 1, false), LinkKind::SameLevel});

    // Exits: half at the bases of the eastern stair shafts, the rest on the
    // south side of the eastern odd corridor.
    struct ExitSite {
        Point2 position;
        NodeId attach;
        LinkKind kind;
    };
    std::vector<ExitSite> sites;
    const int at_stairs = std::min(spec.n_stair_shafts, spec.n_exits / 2);
    for (int s = spec.n_stair_shafts - at_stairs; s < spec.n_stair_shafts; ++s) {
        const int i = stairs[static_cast<std::size_t>(s)];
        sites.push_back({{stair_x(i) + 0.4 * spacing, y_mid}, stair_label(s, ground), LinkKind::StairAccess});
    }
    for (int i = npc - 1; i >= 0 && static_cast<int>(sites.size()) < spec.n_exits; --i) {
        if (stair_set.contains(i)) continue;
        sites.push_back({{x_at(i), y_odd - 0.5 * width}, corridor_label(ground, i, true), LinkKind::SameLevel});
    }
    if (static_cast<int>(sites.size()) < spec.n_exits)
        throw Error("not enough frontage for " + std::to_string(spec.n_exits) + " exits");
    std::sort(sites.begin(), sites.end(), [](const ExitSite& a, const ExitSite& b) {
        return std::tie(a.position.x, a.position.y) < std::tie(b.position.x, b.position.y);
    });
    const int first_exit = spec.n_exits <= 9 ? 11 : 10;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const std::string id = std::to_string(first_exit + static_cast<int>(k));
        d.nodes.push_back({id, ground, NodeKind::Exit, sites[k].position, Corridor::None});
        d.links.push_back({id, sites[k].attach, sites[k].kind});
    }
    return IndoorNetwork::build(d);
}

std::vector<TaskSpec> default_tasks(const BuildingSpec& spec) {
    if (spec.n_levels < 2 || spec.nodes_per_corridor < 9)
        throw Error("default tasks need at least 2 levels and 9 nodes per corridor");
    const int top = spec.n_levels;
    const auto label = [](int level, int number) { return std::to_string(level * 100 + number); };
    return {
        {1, label(top, 2), label(top, 99), 0.28},
        {2, label(top, 99), label(2, 1), 0.30},
        {3, label(2, 1), label(top, 18), 0.22},
        {4, label(top, 18), std::nullopt, 0.10},
    };
}

std::string participant_id(int agent_index, int n_agents) {
    const std::size_t width = std::max<std::size_t>(2, std::to_string(n_agents).size());
    std::string digits = std::to_string(agent_index + 1);
    return "P" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

GeneratedSequences generate_sequences(const IndoorNetwork& net, std::span<const TaskSpec> tasks,
                                      const AgentPolicy& policy, int n_agents, int jobs) {
    if (n_agents < 0) throw Error("n_agents must be >= 0");
    if (!(policy.deviation_prob >= 0.0 && policy.deviation_prob < 1.0))
        throw Error("deviation_prob must lie in [0, 1)");

    struct Plan {
        std::size_t origin;
        std::vector<bool> is_goal;
        std::vector<int> dist; // hops to the nearest goal
        double deviation;
    };
    std::vector<Plan> plans;
    for (const TaskSpec& task : tasks) {
        if (task.task_id < 1 || task.task_id > 4) throw Error("task id must be in 1..4");
        Plan plan;
        plan.origin = net.require_index(task.origin);
        plan.is_goal.assign(net.size(), false);
        plan.dist.assign(net.size(), -1);
        plan.deviation = task.deviation_prob.value_or(policy.deviation_prob);
        if (!(plan.deviation >= 0.0 && plan.deviation < 1.0)) throw Error("deviation_prob must lie in [0, 1)");
        std::vector<std::size_t> goals;
        if (task.destination) {
            goals.push_back(net.require_index(*task.destination));
        } else {
            for (std::size_t i = 0; i < net.size(); ++i)
                if (net.node_at(i).kind == NodeKind::Exit) goals.push_back(i);
            if (goals.empty()) throw Error("task " + std::to_string(task.task_id) + " targets an exit but none exist");
        }
        for (std::size_t g : goals) {
            plan.is_goal[g] = true;
            const auto d = net.hop_distances_to(g);
            for (std::size_t i = 0; i < d.size(); ++i)
                if (d[i] >= 0 && (plan.dist[i] < 0 || d[i] < plan.dist[i])) plan.dist[i] = d[i];
        }
        if (plan.dist[plan.origin] < 0)
            throw Error("task " + std::to_string(task.task_id) + " is not realizable from '" + task.origin + "'");
        plans.push_back(std::move(plan));
    }

    const std::size_t n_tasks = plans.size();
    const std::size_t total = static_cast<std::size_t>(n_agents) * n_tasks;
    std::vector<std::optional<DecisionSequence>> produced(total);
    parallel_for(total, jobs, [&](std::size_t job) {
        const std::size_t agent = job / n_tasks;
        const std::size_t t = job % n_tasks;
        const Plan& plan = plans[t];
        RandomStream rng(derive_seed(derive_seed(policy.seed, agent), static_cast<std::uint64_t>(tasks[t].task_id)));

        DecisionSequence seq;
        seq.participant = participant_id(static_cast<int>(agent), n_agents);
        seq.task = tasks[t].task_id;
        std::vector<int> visits(net.size(), 0);
        std::size_t at = plan.origin;
        seq.nodes.push_back(net.node_at(at).id);
        ++visits[at];
        std::vector<double> weights;
        for (int step = 0; !plan.is_goal[at]; ++step) {
            if (step >= policy.step_cap) return;
            const auto& adj = net.neighbor_indices(at);
            if (rng.bernoulli(plan.deviation)) {
                weights.clear();
                double sum = 0.0;
                for (std::size_t v : adj) {
                    weights.push_back(std::exp(-policy.revisit_penalty * visits[v]));
                    sum += weights.back();
                }
                double u = rng.uniform01() * sum;
                std::size_t pick = adj.size() - 1;
                for (std::size_t k = 0; k < adj.size(); ++k) {
                    if (u < weights[k]) {
                        pick = k;
                        break;
                    }
                    u -= weights[k];
                }
                at = adj[pick];
            } else {
                at = *std::find_if(adj.begin(), adj.end(), [&](std::size_t v) { return plan.dist[v] == plan.dist[at] - 1; });
            }
            seq.nodes.push_back(net.node_at(at).id);
            ++visits[at];
        }
        produced[job] = std::move(seq);
    });

    GeneratedSequences out;
    for (std::size_t job = 0; job < total; ++job) {
        if (produced[job]) {
            out.sequences.push_back(std::move(*produced[job]));
        } else {
            out.warnings.push_back("agent " + participant_id(static_cast<int>(job / n_tasks), n_agents) + " task " +
                                   std::to_string(tasks[job % n_tasks].task_id) + " exceeded the step cap of " +
                                   std::to_string(policy.step_cap) + "; sequence dropped");
        }
    }
    return out;
}

double level_elevation(const IndoorNetwork& net, int level, double floor_height_m) {
    const auto rank = net.level_rank(level);
    if (!rank) throw Error("unknown level " + std::to_string(level));
    return static_cast<double>(*rank) * floor_height_m;
}

std::vector<FloorTransform> default_virtual_frame(const IndoorNetwork& net, double floor_height_m) {
    std::vector<FloorTransform> out;
    for (int level : net.levels()) {
        const auto r = static_cast<double>(*net.level_rank(level));
        FloorTransform t;
        t.level = level;
        t.scale = 1.25;
        t.rotation = 0.35 + 0.01 * r;
        t.tx = 30.0 + r;
        t.ty = -12.0 + 0.5 * r;
        const double e = level_elevation(net, level, floor_height_m);
        t.z_min = e - 0.25 * floor_height_m;
        t.z_max = e + 0.25 * floor_height_m;
        out.push_back(t);
    }
    return out;
}

std::vector<ControlPointPair> corner_control_points(const IndoorNetwork& net, std::span<const FloorTransform> frame,
                                                   const BuildingSpec& spec) {
    const double margin = 0.5 * spec.corridor_width_m;
    const std::array<Point2, 4> corners{{{-margin, -margin},
                                         {spec.corridor_length_m + margin, -margin},
                                         {spec.corridor_length_m + margin, spec.corridor_width_m + margin},
                                         {-margin, spec.corridor_width_m + margin}}};
    std::vector<ControlPointPair> out;
    for (const FloorTransform& t : frame) {
        const double z = level_elevation(net, t.level, spec.floor_height_m);
        for (const Point2& m : corners) {
            const Point2 v = t.invert(m);
            out.push_back({t.level, {v.x, v.y, z}, m});
        }
    }
    return out;
}

std::vector<Trajectory> sequences_to_trajectories(std::span<const DecisionSequence> sequences,
                                                  const IndoorNetwork& net, const SynthConfig& cfg, int jobs) {
    if (cfg.sample_interval_ms < 1) throw Error("sample interval must be >= 1 ms");
    if (!(cfg.walk_speed_mps > 0)) throw Error("walk speed must be positive");
    if (!(cfg.position_noise_m >= 0)) throw Error("position noise must be >= 0");
    const std::vector<FloorTransform> frame =
        cfg.virtual_frame.empty() ? default_virtual_frame(net, cfg.floor_height_m) : cfg.virtual_frame;
    for (int level : net.levels())
        if (std::none_of(frame.begin(), frame.end(), [&](const auto& t) { return t.level == level; }))
            throw Error("virtual frame has no transform for level " + std::to_string(level));

    const auto frame_for_z = [&](double z) -> const FloorTransform& {
        const FloorTransform* best = nullptr;
        double best_gap = 0.0;
        for (const auto& t : frame) {
            const double gap = std::abs(z - level_elevation(net, t.level, cfg.floor_height_m));
            if (!best || gap < best_gap) {
                best = &t;
                best_gap = gap;
            }
        }
        return *best;
    };

    std::vector<Trajectory> out(sequences.size());
    parallel_for(sequences.size(), jobs, [&](std::size_t i) {
        const DecisionSequence& seq = sequences[i];
        Trajectory traj;
        traj.participant = seq.participant;
        traj.task = seq.task;
        if (seq.nodes.empty()) {
            out[i] = std::move(traj);
            return;
        }
        std::vector<Point3> points;
        for (const auto& id : seq.nodes) {
            const Node& n = net.node(id);
            points.push_back({n.position.x, n.position.y, level_elevation(net, n.level, cfg.floor_height_m)});
        }
        std::vector<double> cumulative{0.0};
        for (std::size_t k = 1; k < points.size(); ++k) {
            const double dx = points[k].x - points[k - 1].x;
            const double dy = points[k].y - points[k - 1].y;
            const double dz = points[k].z - points[k - 1].z;
            cumulative.push_back(cumulative.back() + std::sqrt(dx * dx + dy * dy + dz * dz));
        }
        const double total_ms = cumulative.back() / cfg.walk_speed_mps * 1000.0;
        const auto n_samples = static_cast<std::int64_t>(std::floor(total_ms / cfg.sample_interval_ms)) + 1;
        const std::uint64_t stream = derive_seed(cfg.seed, io::fnv1a64(seq.participant));
        RandomStream rng(derive_seed(stream, static_cast<std::uint64_t>(seq.task)));
        traj.samples.reserve(static_cast<std::size_t>(n_samples));
        std::size_t seg = 1;
        for (std::int64_t k = 0; k < n_samples; ++k) {
            const std::int64_t t_ms = k * cfg.sample_interval_ms;
            const double dist = std::min(cumulative.back(), static_cast<double>(t_ms) / 1000.0 * cfg.walk_speed_mps);
            while (seg + 1 < cumulative.size() && cumulative[seg] < dist) ++seg;
            Point3 p = points.front();
            double heading = 0.0;
            if (points.size() > 1) {
                const Point3& a = points[seg - 1];
                const Point3& b = points[seg];
                const double len = cumulative[seg] - cumulative[seg - 1];
                const double f = len > 0 ? (dist - cumulative[seg - 1]) / len : 0.0;
                p = {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)};
                if (b.x != a.x || b.y != a.y) heading = std::atan2(b.y - a.y, b.x - a.x);
            }
            if (cfg.position_noise_m > 0) {
                p.x += cfg.position_noise_m * rng.normal();
                p.y += cfg.position_noise_m * rng.normal();
            }
            const FloorTransform& t = frame_for_z(p.z);
            const Point2 v = t.invert({p.x, p.y});
            TrajectorySample s;
            s.t_ms = t_ms;
            s.position = {v.x, v.y, p.z};
            s.head.yaw = std::fmod((heading - t.rotation) * 180.0 / std::numbers::pi + 720.0, 360.0);
            s.gaze = s.position;
            traj.samples.push_back(s);
        }
        out[i] = std::move(traj);
    });
    return out;
}

std::map<std::string, PersonProfile> generate_profiles(std::span<const std::string> participants, std::uint64_t seed) {
    struct Vocabulary {
        std::vector<std::string> categories;
        std::vector<double> weights;
    };
    const Vocabulary gender{{"Male", "Female"}, {41, 29}};
    const std::vector<std::string> familiarity{"Not at all familiar", "A-little familiar", "Moderately familiar",
                                               "Quite-a-bit familiar", "Very familiar"};
    const Vocabulary building{familiarity, {0, 6, 9, 16, 39}};
    const Vocabulary gaming{familiarity, {9, 12, 13, 14, 22}};
    const Vocabulary education{{"High school or equivalent", "Bachelor's degree or equivalent",
                                "Master's degree or equivalent", "Doctoral degree or equivalent"},
                               {5, 16, 40, 9}};
    const Vocabulary vr{{"Never", "Seldom", "Sometimes", "Often", "Very often"}, {18, 33, 15, 1, 3}};
    const Vocabulary evacuation{{"No", "Yes"}, {1, 1}};
    const Vocabulary device{{"desktop", "hmd"}, {34, 36}};

    const auto draw = [](RandomStream& rng, const Vocabulary& v) {
        double total = 0.0;
        for (double w : v.weights) total += w;
        double u = rng.uniform01() * total;
        for (std::size_t k = 0; k < v.categories.size(); ++k) {
            if (u < v.weights[k]) return v.categories[k];
            u -= v.weights[k];
        }
        return v.categories.back();
    };

    std::map<std::string, PersonProfile> out;
    for (std::size_t i = 0; i < participants.size(); ++i) {
        RandomStream rng(derive_seed(seed ^ 0x5EED5EEDULL, io::fnv1a64(participants[i])));
        PersonProfile p;
        p.gender = draw(rng, gender);
        p.age = std::clamp(std::round(28.27 + 6.38 * rng.normal()), 17.0, 64.0);
        p.height = std::round(p.gender == "Male" ? 181.0 + 7.0 * rng.normal() : 168.0 + 6.5 * rng.normal());
        p.education = draw(rng, education);
        p.vr_experience = draw(rng, vr);
        p.gaming_experience = draw(rng, gaming);
        p.building_familiarity = draw(rng, building);
        p.evacuation_experience = draw(rng, evacuation);
        p.device = draw(rng, device);
        out.emplace(participants[i], std::move(p));
    }
    return out;
}

} // namespace wayfind
