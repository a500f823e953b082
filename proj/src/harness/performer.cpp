#include "ahce/harness.hpp"

#include <cstdlib>

namespace ahce::harness {

namespace {

using craftworld::Action;
using craftworld::Position;

int torus_delta(int from, int to, int n) {
    int d = ((to - from) % n + n) % n;
    if (d > n / 2) d -= n;
    return d;
}

int sign(int v) { return (v > 0) - (v < 0); }

}  // namespace

Performer::Performer(const RuleSet& rules, PerformerConfig cfg, std::uint64_t seed)
    : rules_(rules), cfg_(cfg), rng_(seed) {}

void Performer::begin(const craftworld::SubTask& task, const craftworld::WorldState& state) {
    const bool retry = started_ && task.search_attempt > 0 && task.item == task_.item && task.kind == task_.kind;
    task_ = task;
    started_ = true;
    if (!retry) anchor_ = state.agent_pos;
    radius_ = cfg_.search_radius + cfg_.search_growth * task.search_attempt;
    visited_.clear();
}

std::optional<Position> Performer::nearest_visible(const craftworld::WorldState& state, ItemId resource) const {
    std::optional<Position> best;
    int best_dist = 0;
    const int v = cfg_.vision_radius;
    for (int dy = -v; dy <= v; ++dy) {
        for (int dx = -v; dx <= v; ++dx) {
            const auto p = state.wrap({state.agent_pos.x + dx, state.agent_pos.y + dy});
            if (state.resource_at(p, state.agent_depth) != resource) continue;
            const int dist = std::max(std::abs(dx), std::abs(dy));
            if (!best || dist < best_dist) {
                best = Position{dx, dy};
                best_dist = dist;
            }
        }
    }
    return best;
}

Action Performer::wander(const craftworld::WorldState& state) {
    visited_.insert({state.agent_pos.x, state.agent_pos.y});
    const int w = state.terrain->width, h = state.terrain->height;
    std::vector<craftworld::Move> inside, fresh;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const auto p = state.wrap({state.agent_pos.x + dx, state.agent_pos.y + dy});
            if (std::abs(torus_delta(anchor_.x, p.x, w)) > radius_ || std::abs(torus_delta(anchor_.y, p.y, h)) > radius_)
                continue;
            inside.push_back({dx, dy});
            if (!visited_.count({p.x, p.y})) fresh.push_back({dx, dy});
        }
    }
    const auto& pool = fresh.empty() ? inside : fresh;
    if (pool.empty()) return craftworld::Noop{};
    return pool[rng_.below(pool.size())];
}

Action Performer::next(const craftworld::WorldState& state) {
    if (task_.kind == craftworld::SubTaskKind::craft) return craftworld::Craft{task_.item};

    const auto resource = *task_.source;
    const auto* rule = rules_.mining_for_resource(resource);
    if (rule->is_surface() && state.agent_depth > 0) return craftworld::ClimbUp{};
    if (state.resource_at(state.agent_pos, state.agent_depth) == resource) return craftworld::Mine{resource};

    const auto strategy = task_.strategy;
    if (strategy == craftworld::Strategy::dig_down && state.agent_depth < rule->depth_min) return craftworld::DigDown{};
    if (strategy == craftworld::Strategy::leave_biome && state.current_biome() == craftworld::Biome::desert)
        return craftworld::Move{1, 0};
    if (auto seen = nearest_visible(state, resource)) return craftworld::Move{sign(seen->x), sign(seen->y)};
    if (strategy == craftworld::Strategy::dig_down && state.agent_depth < rule->depth_max) return craftworld::DigDown{};
    return wander(state);
}

}  // namespace ahce::harness
