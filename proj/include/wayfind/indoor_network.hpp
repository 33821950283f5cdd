#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wayfind {

/// Decision-point label, e.g. "402", "16", "A3".
using NodeId = std::string;

enum class NodeKind { CorridorJunction, RoomAccess, Staircase, Exit };

enum class LinkKind { SameLevel, StairStair, StairAccess };

/// Which major corridor a numbered node belongs to; drives the parity rule
/// (one corridor carries odd numbers, the other even).
enum class Corridor { None, Odd, Even };

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Node {
    NodeId id;
    int level = 0;
    NodeKind kind = NodeKind::CorridorJunction;
    Point2 position;
    Corridor corridor = Corridor::None;

    friend bool operator==(const Node&, const Node&) = default;
};

/// Undirected link. Stored normalized with a < b.
struct Link {
    NodeId a;
    NodeId b;
    LinkKind kind = LinkKind::SameLevel;

    friend bool operator==(const Link&, const Link&) = default;
};

/// Unvalidated network content, as read from a network document.
struct NetworkDescription {
    std::vector<int> levels;
    std::optional<int> ground_level;
    std::vector<Node> nodes;
    std::vector<Link> links;
};

struct NumberingViolation {
    NodeId node;
    std::string rule;
    std::string detail;
};

/// Hierarchical building graph G(V, E, L): decision points, links and levels.
///
/// Immutable after construction. Nodes are kept sorted by label and links
/// normalized and sorted, so two networks built from the same content in any
/// order compare equal.
class IndoorNetwork {
public:
    /// Validates the description and builds the network. Throws InputError
    /// naming the offending label on a duplicate id, dangling link endpoint
    /// or any node/link invariant violation.
    static IndoorNetwork build(const NetworkDescription& description);

    const std::vector<int>& levels() const noexcept { return levels_; }
    int ground_level() const noexcept { return ground_level_; }
    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::span<const Link> links() const noexcept { return links_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    bool contains(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;
    /// Throws Error for an unknown id.
    std::size_t require_index(std::string_view id) const;
    const Node& node(std::string_view id) const { return nodes_[require_index(id)]; }
    const Node& node_at(std::size_t index) const { return nodes_[index]; }

    /// Link-adjacent labels, sorted. Throws Error for an unknown id.
    std::vector<NodeId> neighbors(std::string_view id) const;
    /// Link-adjacent node indices, sorted by label.
    const std::vector<std::size_t>& neighbor_indices(std::size_t index) const { return adjacency_[index]; }
    bool adjacent(std::string_view a, std::string_view b) const;

    /// Minimum-hop path including both endpoints. Throws Error when either id
    /// is unknown or no path exists. Among equal-length paths, each step takes
    /// the smallest-labelled neighbor that is one hop closer to `to`.
    std::vector<NodeId> shortest_path(std::string_view from, std::string_view to) const;

    /// Hop distance from every node to `target` (-1 where unreachable).
    std::vector<int> hop_distances_to(std::size_t target) const;

    /// Node indices on one level, sorted by label.
    std::span<const std::size_t> nodes_on_level(int level) const;

    /// Position of `level` within the sorted level list.
    std::optional<std::size_t> level_rank(int level) const;

    std::size_t count(NodeKind kind) const;
    std::size_t count(LinkKind kind) const;
    bool is_connected() const;
    /// Smallest planar distance between two distinct nodes on `level`
    /// (infinity with fewer than two nodes).
    double min_node_spacing(int level) const;

    NetworkDescription describe() const;

    friend bool operator==(const IndoorNetwork& lhs, const IndoorNetwork& rhs) {
        return lhs.levels_ == rhs.levels_ && lhs.ground_level_ == rhs.ground_level_ &&
               lhs.nodes_ == rhs.nodes_ && lhs.links_ == rhs.links_;
    }

private:
    IndoorNetwork() = default;

    std::vector<int> levels_;
    int ground_level_ = 0;
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::vector<std::size_t>> by_level_;
};

/// Checks the labelling conventions: a numeric label starts with its level
/// digit(s) and matches its declared corridor parity; a staircase label is a
/// shaft letter A-E followed by its level. Returns one entry per violation.
std::vector<NumberingViolation> validate_numbering(const IndoorNetwork& net);

std::string_view to_string(NodeKind kind);
std::string_view to_string(LinkKind kind);
std::string_view to_string(Corridor corridor);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<LinkKind> parse_link_kind(std::string_view text);
std::optional<Corridor> parse_corridor(std::string_view text);

} // namespace wayfind
