#include "wayfind/indoor_network.hpp"

#include "wayfind/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <tuple>

namespace wayfind {

namespace {

bool is_numeric_label(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isdigit(c); });
}

[[noreturn]] void reject(const std::string& message) { throw InputError("", "", message); }

} // namespace

IndoorNetwork IndoorNetwork::build(const NetworkDescription& description) {
    IndoorNetwork net;

    if (description.levels.empty()) reject("network declares no levels");
    net.levels_ = description.levels;
    std::sort(net.levels_.begin(), net.levels_.end());
    if (std::adjacent_find(net.levels_.begin(), net.levels_.end()) != net.levels_.end())
        reject("duplicate level in level list");
    net.ground_level_ = description.ground_level.value_or(net.levels_.front());
    if (!net.level_rank(net.ground_level_))
        reject("ground level " + std::to_string(net.ground_level_) + " is not a declared level");

    net.nodes_ = description.nodes;
    std::sort(net.nodes_.begin(), net.nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < net.nodes_.size(); ++i) {
        const Node& n = net.nodes_[i];
        if (n.id.empty()) reject("node with empty id");
        if (i > 0 && net.nodes_[i - 1].id == n.id) reject("duplicate node id '" + n.id + "'");
        if (!net.level_rank(n.level))
            reject("node '" + n.id + "' is on undeclared level " + std::to_string(n.level));
        if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y))
            reject("node '" + n.id + "' has a non-finite position");
        if (n.kind == NodeKind::Exit && n.level != net.ground_level_)
            reject("exit node '" + n.id + "' is not on the ground level");
        if (n.kind == NodeKind::Staircase && !std::isupper(static_cast<unsigned char>(n.id.front())))
            reject("staircase node '" + n.id + "' does not carry a shaft letter");
    }

    net.by_level_.assign(net.levels_.size(), {});
    for (std::size_t i = 0; i < net.nodes_.size(); ++i)
        net.by_level_[*net.level_rank(net.nodes_[i].level)].push_back(i);

    std::set<std::pair<NodeId, NodeId>> seen;
    net.links_.reserve(description.links.size());
    for (Link link : description.links) {
        const std::string name = "link " + link.a + "-" + link.b;
        if (link.a == link.b) reject("self-link on '" + link.a + "'");
        const auto ia = net.index_of(link.a);
        const auto ib = net.index_of(link.b);
        if (!ia) reject(name + " has unknown endpoint '" + link.a + "'");
        if (!ib) reject(name + " has unknown endpoint '" + link.b + "'");
        if (link.b < link.a) std::swap(link.a, link.b);
        if (!seen.emplace(link.a, link.b).second) reject("duplicate " + name);

        const Node& a = net.nodes_[*ia];
        const Node& b = net.nodes_[*ib];
        const auto rank_gap = [&] {
            const auto ra = static_cast<long>(*net.level_rank(a.level));
            const auto rb = static_cast<long>(*net.level_rank(b.level));
            return std::labs(ra - rb);
        }();
        const bool stair_a = a.kind == NodeKind::Staircase;
        const bool stair_b = b.kind == NodeKind::Staircase;
        switch (link.kind) {
        case LinkKind::SameLevel:
            if (a.level != b.level) reject(name + " is same_level but joins levels " + std::to_string(a.level) +
                                           " and " + std::to_string(b.level));
            break;
        case LinkKind::StairStair:
            if (!stair_a || !stair_b) reject(name + " is stair_stair but an endpoint is not a staircase");
            if (rank_gap > 1) reject(name + " is stair_stair but skips a level");
            break;
        case LinkKind::StairAccess:
            if (stair_a == stair_b) reject(name + " is stair_access but does not have exactly one staircase endpoint");
            if (rank_gap > 1) reject(name + " is stair_access but skips a level");
            break;
        }
        net.links_.push_back(std::move(link));
    }
    std::sort(net.links_.begin(), net.links_.end(),
              [](const Link& x, const Link& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

    net.adjacency_.assign(net.nodes_.size(), {});
    for (const Link& link : net.links_) {
        const auto ia = *net.index_of(link.a);
        const auto ib = *net.index_of(link.b);
        net.adjacency_[ia].push_back(ib);
        net.adjacency_[ib].push_back(ia);
    }
    // indices follow label order, so sorting indices sorts by label
    for (auto& adj : net.adjacency_) std::sort(adj.begin(), adj.end());
    return net;
}

std::optional<std::size_t> IndoorNetwork::index_of(std::string_view id) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                                     [](const Node& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

bool IndoorNetwork::contains(std::string_view id) const { return index_of(id).has_value(); }

std::size_t IndoorNetwork::require_index(std::string_view id) const {
    if (auto idx = index_of(id)) return *idx;
    throw Error("unknown node '" + std::string(id) + "'");
}

std::vector<NodeId> IndoorNetwork::neighbors(std::string_view id) const {
    std::vector<NodeId> out;
    for (std::size_t j : adjacency_[require_index(id)]) out.push_back(nodes_[j].id);
    return out;
}

bool IndoorNetwork::adjacent(std::string_view a, std::string_view b) const {
    const auto ia = index_of(a);
    const auto ib = index_of(b);
    if (!ia || !ib) return false;
    const auto& adj = adjacency_[*ia];
    return std::binary_search(adj.begin(), adj.end(), *ib);
}

std::vector<NodeId> IndoorNetwork::shortest_path(std::string_view from, std::string_view to) const {
    const std::size_t src = require_index(from);
    const std::size_t dst = require_index(to);
    const auto dist = hop_distances_to(dst);
    if (dist[src] < 0) throw Error("no path from '" + std::string(from) + "' to '" + std::string(to) + "'");
    std::vector<NodeId> path{nodes_[src].id};
    for (std::size_t u = src; u != dst;) {
        // adjacency is label-ordered: the first neighbor one hop closer wins
        const auto& adj = adjacency_[u];
        u = *std::find_if(adj.begin(), adj.end(), [&](std::size_t v) { return dist[v] == dist[u] - 1; });
        path.push_back(nodes_[u].id);
    }
    return path;
}

std::vector<int> IndoorNetwork::hop_distances_to(std::size_t target) const {
    std::vector<int> dist(nodes_.size(), -1);
    dist[target] = 0;
    std::deque<std::size_t> queue{target};
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : adjacency_[u]) {
            if (dist[v] >= 0) continue;
            dist[v] = dist[u] + 1;
            queue.push_back(v);
        }
    }
    return dist;
}

std::span<const std::size_t> IndoorNetwork::nodes_on_level(int level) const {
    if (auto rank = level_rank(level)) return by_level_[*rank];
    return {};
}

std::optional<std::size_t> IndoorNetwork::level_rank(int level) const {
    const auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
    if (it == levels_.end() || *it != level) return std::nullopt;
    return static_cast<std::size_t>(it - levels_.begin());
}

std::size_t IndoorNetwork::count(NodeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.kind == kind; }));
}

std::size_t IndoorNetwork::count(LinkKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(links_.begin(), links_.end(), [&](const Link& l) { return l.kind == kind; }));
}

bool IndoorNetwork::is_connected() const {
    if (nodes_.empty()) return true;
    const auto dist = hop_distances_to(0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

double IndoorNetwork::min_node_spacing(int level) const {
    double best = std::numeric_limits<double>::infinity();
    const auto ids = nodes_on_level(level);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const Point2 p = nodes_[ids[i]].position;
            const Point2 q = nodes_[ids[j]].position;
            best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
        }
    }
    return best;
}

NetworkDescription IndoorNetwork::describe() const {
    return NetworkDescription{levels_, ground_level_, nodes_, links_};
}

std::vector<NumberingViolation> validate_numbering(const IndoorNetwork& net) {
    std::vector<NumberingViolation> out;
    for (const Node& n : net.nodes()) {
        const std::string level = std::to_string(n.level);
        if (n.kind == NodeKind::Staircase) {
            const char shaft = n.id.front();
            if (shaft < 'A' || shaft > 'E')
                out.push_back({n.id, "staircase-shaft", "shaft letter must be one of A-E"});
            if (n.id.substr(1) != level)
                out.push_back({n.id, "staircase-level", "staircase label must end with its level " + level});
            continue;
        }
        if (!is_numeric_label(n.id)) continue;
        if (!n.id.starts_with(level))
            out.push_back({n.id, "level-prefix", "numeric label does not start with its level " + level});
        const bool odd = (n.id.back() - '0') % 2 == 1;
        if (n.corridor == Corridor::Odd && !odd)
            out.push_back({n.id, "corridor-parity", "node on the odd corridor carries an even number"});
        if (n.corridor == Corridor::Even && odd)
            out.push_back({n.id, "corridor-parity", "node on the even corridor carries an odd number"});
    }
    return out;
}

std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::CorridorJunction: return "corridor_junction";
    case NodeKind::RoomAccess: return "room_access";
    case NodeKind::Staircase: return "staircase";
    case NodeKind::Exit: return "exit";
    }
    return "?";
}

std::string_view to_string(LinkKind kind) {
    switch (kind) {
    case LinkKind::SameLevel: return "same_level";
    case LinkKind::StairStair: return "stair_stair";
    case LinkKind::StairAccess: return "stair_access";
    }
    return "?";
}

std::string_view to_string(Corridor corridor) {
    switch (corridor) {
    case Corridor::None: return "none";
    case Corridor::Odd: return "odd";
    case Corridor::Even: return "even";
    }
    return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
    for (auto k : {NodeKind::CorridorJunction, NodeKind::RoomAccess, NodeKind::Staircase, NodeKind::Exit})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

std::optional<LinkKind> parse_link_kind(std::string_view text) {
    for (auto k : {LinkKind::SameLevel, LinkKind::StairStair, LinkKind::StairAccess})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

std::optional<Corridor> parse_corridor(std::string_view text) {
    for (auto c : {Corridor::None, Corridor::Odd, Corridor::Even})
        if (to_string(c) == text) return c;
    return std::nullopt;
}

} // namespace wayfind
