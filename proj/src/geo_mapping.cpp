#include "wayfind/geo_mapping.hpp"

#include "wayfind/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wayfind {

Point2 FloorTransform::apply(Point2 v) const {
    const double c = scale * std::cos(rotation);
    const double s = scale * std::sin(rotation);
    return {c * v.x - s * v.y + tx, s * v.x + c * v.y + ty};
}

Point2 FloorTransform::invert(Point2 m) const {
    const double dx = m.x - tx;
    const double dy = m.y - ty;
    const double c = std::cos(rotation) / scale;
    const double s = std::sin(rotation) / scale;
    return {c * dx + s * dy, -s * dx + c * dy};
}

FloorTransform estimate_transform(std::span<const ControlPointPair> pairs, int level) {
    std::vector<const ControlPointPair*> used;
    for (const auto& p : pairs)
        if (p.level == level) used.push_back(&p);
    if (used.size() < 2)
        throw Error("level " + std::to_string(level) + ": need at least 2 control points, got " +
                    std::to_string(used.size()));

    const double n = static_cast<double>(used.size());
    double vx = 0, vy = 0, mx = 0, my = 0;
    for (const auto* p : used) {
        vx += p->virtual_point.x;
        vy += p->virtual_point.y;
        mx += p->map_point.x;
        my += p->map_point.y;
    }
    vx /= n;
    vy /= n;
    mx /= n;
    my /= n;

    // With a = s cos(theta), b = s sin(theta) the model is linear in
    // (a, b, tx, ty); on centered coordinates the normal equations decouple.
    double spread = 0, map_spread = 0, dot = 0, cross = 0;
    for (const auto* p : used) {
        const double u = p->virtual_point.x - vx;
        const double w = p->virtual_point.y - vy;
        const double du = p->map_point.x - mx;
        const double dw = p->map_point.y - my;
        spread += u * u + w * w;
        map_spread += du * du + dw * dw;
        dot += u * du + w * dw;
        cross += u * dw - w * du;
    }
    const double scale_ref = std::max({std::abs(vx), std::abs(vy), 1.0});
    if (spread <= 1e-24 * scale_ref * scale_ref * n)
        throw Error("level " + std::to_string(level) + ": control points coincide in the virtual frame");
    if (map_spread <= 0.0)
        throw Error("level " + std::to_string(level) + ": control points coincide in the map frame");

    const double a = dot / spread;
    const double b = cross / spread;

    FloorTransform t;
    t.level = level;
    t.scale = std::hypot(a, b);
    t.rotation = std::atan2(b, a);
    if (t.rotation < 0) t.rotation += 2.0 * std::numbers::pi;
    t.tx = mx - (a * vx - b * vy);
    t.ty = my - (b * vx + a * vy);

    double sq = 0;
    for (const auto* p : used) {
        const Point2 m = t.apply({p->virtual_point.x, p->virtual_point.y});
        const double r = std::hypot(m.x - p->map_point.x, m.y - p->map_point.y);
        sq += r * r;
        t.max_residual = std::max(t.max_residual, r);
    }
    t.rms_residual = std::sqrt(sq / n);
    return t;
}

std::optional<int> find_level(double z, std::span<const FloorTransform> transforms) {
    std::optional<int> found;
    for (const auto& t : transforms) {
        if (z >= t.z_min && z < t.z_max) {
            if (found) throw Error("overlapping z ranges for levels " + std::to_string(*found) + " and " +
                                   std::to_string(t.level));
            found = t.level;
        }
    }
    return found;
}

int assign_level(double z, std::span<const FloorTransform> transforms) {
    if (auto level = find_level(z, transforms)) return *level;
    throw Error("z = " + std::to_string(z) + " lies outside every level's z range");
}

void check_transform_table(std::span<const FloorTransform> transforms) {
    for (std::size_t i = 0; i < transforms.size(); ++i) {
        const auto& t = transforms[i];
        if (!(t.scale > 0) || !std::isfinite(t.scale))
            throw InputError("level " + std::to_string(t.level) + ": scale must be positive");
        if (!(t.z_min < t.z_max))
            throw InputError("level " + std::to_string(t.level) + ": empty z range");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& u = transforms[j];
            if (u.level == t.level) throw InputError("level " + std::to_string(t.level) + " listed twice");
            if (t.z_min < u.z_max && u.z_min < t.z_max)
                throw InputError("z ranges of levels " + std::to_string(u.level) + " and " +
                                 std::to_string(t.level) + " overlap");
        }
    }
}

MappedPoint map_point(Point3 p, std::span<const FloorTransform> transforms) {
    const int level = assign_level(p.z, transforms);
    const auto it = std::find_if(transforms.begin(), transforms.end(), [&](const auto& t) { return t.level == level; });
    return {it->apply({p.x, p.y}), level};
}

std::optional<NodeId> snap_to_node(Point2 p, int level, const IndoorNetwork& net, const MappingConfig& cfg) {
    constexpr double kTie = 1e-12;
    std::optional<std::size_t> best;
    double best_d = 0.0;
    // nodes_on_level is label-ordered, so keeping the first of tied
    // candidates keeps the smallest label
    for (std::size_t idx : net.nodes_on_level(level)) {
        const Point2 q = net.node_at(idx).position;
        const double d = std::hypot(p.x - q.x, p.y - q.y);
        if (d > cfg.snap_radius) continue;
        if (!best || d < best_d - kTie) {
            best = idx;
            best_d = d;
        }
    }
    if (!best) return std::nullopt;
    return net.node_at(*best).id;
}

ExtractionResult extract_decision_sequence(const Trajectory& traj, const IndoorNetwork& net,
                                           std::span<const FloorTransform> transforms,
                                           const MappingConfig& cfg) {
    const std::string who = "participant " + traj.participant + " task " + std::to_string(traj.task);
    if (traj.samples.empty()) throw Error(who + ": empty trajectory");
    if (traj.task < 1 || traj.task > 4) throw Error(who + ": task must be in 1..4");
    if (!(cfg.snap_radius > 0)) throw Error("snap radius must be positive");

    ExtractionResult out;
    out.sequence.participant = traj.participant;
    out.sequence.task = traj.task;
    auto& nodes = out.sequence.nodes;

    std::int64_t last_t = traj.samples.front().t_ms;
    for (const auto& s : traj.samples) {
        if (s.t_ms < last_t) throw Error(who + ": timestamps decrease at t = " + std::to_string(s.t_ms));
        last_t = s.t_ms;
        const auto level = find_level(s.position.z, transforms);
        if (!level) continue;
        const auto it =
            std::find_if(transforms.begin(), transforms.end(), [&](const auto& t) { return t.level == *level; });
        const auto hit = snap_to_node(it->apply({s.position.x, s.position.y}), *level, net, cfg);
        if (!hit) continue;
        if (nodes.empty() || nodes.back() != *hit) nodes.push_back(*hit);
    }

    if (nodes.empty()) out.warnings.push_back(who + ": trajectory maps to no decision point");
    if (cfg.warn_on_nonadjacent) {
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!net.adjacent(nodes[i - 1], nodes[i]))
                out.warnings.push_back(who + ": consecutive nodes " + nodes[i - 1] + " -> " + nodes[i] +
                                       " are not linked");
    }
    return out;
}

} // namespace wayfind
