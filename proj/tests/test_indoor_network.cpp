#include <doctest.h>

#include "wayfind/error.hpp"
#include "wayfind/indoor_network.hpp"
#include "wayfind/rng.hpp"

#include <algorithm>
#include <deque>
#include <string>
#include <vector>

using namespace wayfind;

namespace {

Node junction(std::string id, int level, double x = 0.0, double y = 0.0) {
    return Node{std::move(id), level, NodeKind::CorridorJunction, {x, y}, Corridor::None};
}

NetworkDescription line_abc() {
    NetworkDescription d;
    d.levels = {1};
    d.nodes = {junction("a", 1, 0), junction("b", 1, 1), junction("c", 1, 2)};
    d.links = {{"a", "b", LinkKind::SameLevel}, {"b", "c", LinkKind::SameLevel}};
    return d;
}

// Random connected graph on one level: a random spanning tree plus extra edges.
NetworkDescription random_network(RandomStream& rng, int n, int extra) {
    NetworkDescription d;
    d.levels = {1};
    for (int i = 0; i < n; ++i) d.nodes.push_back(junction("n" + std::to_string(i), 1, i, 0));
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i < n; ++i) edges.emplace_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i))), i);
    for (int k = 0; k < extra; ++k) {
        const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        const int b = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        const auto e = std::minmax(a, b);
        if (std::find(edges.begin(), edges.end(), std::pair{e.first, e.second}) != edges.end() ||
            std::find(edges.begin(), edges.end(), std::pair{e.second, e.first}) != edges.end())
            continue;
        edges.emplace_back(e.first, e.second);
    }
    for (auto [a, b] : edges)
        d.links.push_back({"n" + std::to_string(a), "n" + std::to_string(b), LinkKind::SameLevel});
    return d;
}

// Independent breadth-first hop count over the raw description.
int bfs_hops(const NetworkDescription& d, const std::string& from, const std::string& to) {
    std::deque<std::pair<std::string, int>> queue{{from, 0}};
    std::vector<std::string> seen{from};
    while (!queue.empty()) {
        auto [id, dist] = queue.front();
        queue.pop_front();
        if (id == to) return dist;
        for (const Link& l : d.links) {
            std::string next;
            if (l.a == id) next = l.b;
            else if (l.b == id) next = l.a;
            else continue;
            if (std::find(seen.begin(), seen.end(), next) != seen.end()) continue;
            seen.push_back(next);
            queue.emplace_back(next, dist + 1);
        }
    }
    return -1;
}

} // namespace

TEST_CASE("single node network") {
    NetworkDescription d;
    d.levels = {1};
    d.nodes = {junction("101", 1)};
    const auto net = IndoorNetwork::build(d);
    CHECK(net.size() == 1);
    CHECK(net.links().empty());
    CHECK(net.neighbors("101").empty());
    CHECK(net.is_connected());
}

TEST_CASE("build rejects invalid descriptions") {
    SUBCASE("duplicate id") {
        auto d = line_abc();
        d.nodes.push_back(junction("b", 1));
        CHECK_THROWS_WITH_AS(IndoorNetwork::build(d), doctest::Contains("'b'"), InputError);
    }
    SUBCASE("dangling endpoint") {
        auto d = line_abc();
        d.links.push_back({"a", "zz", LinkKind::SameLevel});
        CHECK_THROWS_WITH_AS(IndoorNetwork::build(d), doctest::Contains("zz"), InputError);
    }
    SUBCASE("self link") {
        auto d = line_abc();
        d.links.push_back({"a", "a", LinkKind::SameLevel});
        CHECK_THROWS_AS(IndoorNetwork::build(d), InputError);
    }
    SUBCASE("duplicate link in either direction") {
        auto d = line_abc();
        d.links.push_back({"b", "a", LinkKind::SameLevel});
        CHECK_THROWS_AS(IndoorNetwork::build(d), InputError);
    }
    SUBCASE("same-level link across levels") {
        NetworkDescription d;
        d.levels = {1, 2};
        d.nodes = {junction("101", 1), junction("201", 2)};
        d.links = {{"101", "201", LinkKind::SameLevel}};
        CHECK_THROWS_WITH_AS(IndoorNetwork::build(d), doctest::Contains("same_level"), InputError);
    }
    SUBCASE("stair access between two non-staircases") {
        NetworkDescription d;
        d.levels = {1, 2};
        d.nodes = {junction("101", 1), junction("201", 2)};
        d.links = {{"101", "201", LinkKind::StairAccess}};
        CHECK_THROWS_WITH_AS(IndoorNetwork::build(d), doctest::Contains("stair_access"), InputError);
    }
    SUBCASE("stair link skipping a level") {
        NetworkDescription d;
        d.levels = {1, 2, 3};
        d.nodes = {{"A1", 1, NodeKind::Staircase, {0, 0}}, {"A3", 3, NodeKind::Staircase, {0, 0}}};
        d.links = {{"A1", "A3", LinkKind::StairStair}};
        CHECK_THROWS_AS(IndoorNetwork::build(d), InputError);
    }
    SUBCASE("exit above ground") {
        NetworkDescription d;
        d.levels = {1, 2};
        d.nodes = {{"21", 2, NodeKind::Exit, {0, 0}}};
        CHECK_THROWS_WITH_AS(IndoorNetwork::build(d), doctest::Contains("'21'"), InputError);
    }
    SUBCASE("undeclared level") {
        NetworkDescription d;
        d.levels = {1};
        d.nodes = {junction("301", 3)};
        CHECK_THROWS_AS(IndoorNetwork::build(d), InputError);
    }
}

TEST_CASE("numbering rules") {
    NetworkDescription d;
    d.levels = {1, 2, 3, 4};
    d.nodes = {junction("402", 4), {"A3", 3, NodeKind::Staircase, {0, 0}}};
    CHECK(validate_numbering(IndoorNetwork::build(d)).empty());

    d.nodes = {junction("402", 2)};
    auto v = validate_numbering(IndoorNetwork::build(d));
    REQUIRE(v.size() == 1);
    CHECK(v[0].node == "402");
    CHECK(v[0].rule == "level-prefix");

    d.nodes = {{"401", 4, NodeKind::CorridorJunction, {0, 0}, Corridor::Even},
               {"F4", 4, NodeKind::Staircase, {0, 0}},
               {"B2", 4, NodeKind::Staircase, {1, 0}}};
    v = validate_numbering(IndoorNetwork::build(d));
    std::vector<std::string> rules;
    for (const auto& x : v) rules.push_back(x.rule);
    std::sort(rules.begin(), rules.end());
    CHECK(rules == std::vector<std::string>{"corridor-parity", "staircase-level", "staircase-shaft"});
}

TEST_CASE("neighbors") {
    const auto net = IndoorNetwork::build(line_abc());
    CHECK(net.neighbors("b") == std::vector<NodeId>{"a", "c"});
    CHECK_THROWS_AS(net.neighbors("q"), Error);

    auto d = line_abc();
    d.nodes.push_back(junction("d", 1, 3));
    d.links.push_back({"b", "d", LinkKind::SameLevel});
    CHECK(IndoorNetwork::build(d).neighbors("b").size() == 3);
}

TEST_CASE("adjacency is symmetric on random networks") {
    RandomStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = IndoorNetwork::build(random_network(rng, 15, 10));
        for (const Node& a : net.nodes())
            for (const Node& b : net.nodes()) {
                const auto na = net.neighbors(a.id);
                const auto nb = net.neighbors(b.id);
                const bool ab = std::find(na.begin(), na.end(), b.id) != na.end();
                const bool ba = std::find(nb.begin(), nb.end(), a.id) != nb.end();
                CHECK(ab == ba);
                CHECK(ab == net.adjacent(a.id, b.id));
            }
    }
}

TEST_CASE("shortest path") {
    const auto net = IndoorNetwork::build(line_abc());
    CHECK(net.shortest_path("a", "a") == std::vector<NodeId>{"a"});
    CHECK(net.shortest_path("a", "c") == std::vector<NodeId>{"a", "b", "c"});

    auto d = line_abc();
    d.nodes.push_back(junction("z", 1, 9));
    CHECK_THROWS_AS(IndoorNetwork::build(d).shortest_path("a", "z"), Error);
}

TEST_CASE("shortest path hop count matches breadth-first oracle") {
    RandomStream rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto d = random_network(rng, 25, 15);
        const auto net = IndoorNetwork::build(d);
        CHECK(net.is_connected());
        for (int q = 0; q < 10; ++q) {
            const std::string from = "n" + std::to_string(rng.uniform_index(25));
            const std::string to = "n" + std::to_string(rng.uniform_index(25));
            const auto path = net.shortest_path(from, to);
            REQUIRE(!path.empty());
            CHECK(path.front() == from);
            CHECK(path.back() == to);
            for (std::size_t i = 1; i < path.size(); ++i) CHECK(net.adjacent(path[i - 1], path[i]));
            CHECK(static_cast<int>(path.size()) - 1 == bfs_hops(d, from, to));
        }
    }
}

TEST_CASE("build is order independent") {
    RandomStream rng(3);
    auto d = random_network(rng, 12, 6);
    const auto net = IndoorNetwork::build(d);
    std::reverse(d.nodes.begin(), d.nodes.end());
    for (Link& l : d.links) std::swap(l.a, l.b);
    std::reverse(d.links.begin(), d.links.end());
    CHECK(IndoorNetwork::build(d) == net);
    CHECK(IndoorNetwork::build(net.describe()) == net);
}

TEST_CASE("link kind constraints hold per link") {
    NetworkDescription d;
    d.levels = {1, 2};
    d.nodes = {junction("101", 1), {"A1", 1, NodeKind::Staircase, {0, 0}},
               {"A2", 2, NodeKind::Staircase, {0, 0}}, junction("201", 2)};
    d.links = {{"101", "A1", LinkKind::StairAccess},
               {"A1", "A2", LinkKind::StairStair},
               {"A2", "201", LinkKind::StairAccess}};
    const auto net = IndoorNetwork::build(d);
    CHECK(net.is_connected());
    CHECK(net.count(LinkKind::StairStair) == 1);
    CHECK(net.count(NodeKind::Staircase) == 2);
    for (const Link& l : net.links()) {
        const Node& a = net.node(l.a);
        const Node& b = net.node(l.b);
        CHECK(l.a < l.b);
        if (l.kind == LinkKind::SameLevel) CHECK(a.level == b.level);
        if (l.kind == LinkKind::StairStair) CHECK((a.kind == NodeKind::Staircase && b.kind == NodeKind::Staircase));
        if (l.kind == LinkKind::StairAccess)
            CHECK(((a.kind == NodeKind::Staircase) != (b.kind == NodeKind::Staircase)));
    }
}
