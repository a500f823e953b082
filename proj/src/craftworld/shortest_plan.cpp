// Ground-truth planner used as the reference oracle: exhaustive enumeration of
// acquisition-method assignments with fixpoint demand propagation.

#include "ahce/craftworld.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace ahce::craftworld {

namespace {

struct Method {
    bool craft = false;
    std::size_t rule = 0;  // recipe index or mining-rule index
    std::optional<ItemId> tool;

    auto key() const { return std::tuple(craft ? 1 : 0, rule, tool ? int(tool->index) : -1); }
};

std::vector<Method> methods_for(ItemId item, const RuleSet& rules) {
    std::vector<Method> out;
    const auto recipes = rules.recipes();
    for (std::size_t i = 0; i < recipes.size(); ++i) {
        if (recipes[i].output == item) out.push_back({true, i, std::nullopt});
    }
    const auto mining = rules.mining();
    for (std::size_t i = 0; i < mining.size(); ++i) {
        if (mining[i].drop != item) continue;
        if (mining[i].required_tier <= kHandTier) {
            out.push_back({false, i, std::nullopt});
        } else {
            for (auto tool : rules.tools_with_tier_at_least(mining[i].required_tier)) out.push_back({false, i, tool});
        }
    }
    return out;
}

std::vector<ItemId> method_prerequisites(const Method& m, const RuleSet& rules) {
    std::vector<ItemId> out;
    if (m.craft) {
        const auto& r = rules.recipes()[m.rule];
        for (const auto& in : r.inputs) out.push_back(in.item);
        if (r.station) out.push_back(*r.station);
    } else if (m.tool) {
        out.push_back(*m.tool);
    }
    return out;
}

struct Candidate {
    std::vector<SubTask> tasks;
    std::vector<std::tuple<int, int, std::size_t, int>> key;
};

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

std::vector<SubTask> canonical_order(std::vector<PlanNode> nodes, const RuleSet& rules) {
    auto phase = [&rules](const SubTask& t) {
        if (t.kind == SubTaskKind::craft) return 1;
        const auto* rule = t.source ? rules.mining_for_resource(*t.source) : nullptr;
        return rule && rule->is_surface() ? 0 : 2;
    };

    std::set<ItemId> pending;
    for (const auto& n : nodes) pending.insert(n.task.item);

    std::vector<SubTask> ordered;
    while (!nodes.empty()) {
        auto best = nodes.end();
        for (auto it = nodes.begin(); it != nodes.end(); ++it) {
            const bool ready = std::none_of(it->prerequisites.begin(), it->prerequisites.end(),
                                            [&](ItemId p) { return p != it->task.item && pending.count(p) > 0; });
            if (!ready) continue;
            if (best == nodes.end() || std::pair(phase(it->task), it->task.item.index) <
                                           std::pair(phase(best->task), best->task.item.index)) {
                best = it;
            }
        }
        if (best == nodes.end()) throw InfeasibleError("cyclic prerequisites in plan");
        pending.erase(best->task.item);
        ordered.push_back(best->task);
        nodes.erase(best);
    }
    return ordered;
}

std::vector<SubTask> shortest_plan(ItemId target, const WorldState& state, const RuleSet& rules, int step_budget) {
    return shortest_plan(target, state.inventory, rules, step_budget);
}

std::vector<SubTask> shortest_plan(ItemId target, const Inventory& inventory, const RuleSet& rules, int step_budget) {
    rules.check(target);
    if (inventory.has(target)) return {};

    // Items that could take part in any plan for the target.
    std::vector<ItemId> relevant;
    std::vector<std::vector<Method>> options;
    {
        std::set<ItemId> seen{target};
        std::vector<ItemId> frontier{target};
        while (!frontier.empty()) {
            const auto item = frontier.back();
            frontier.pop_back();
            relevant.push_back(item);
            for (const auto& m : methods_for(item, rules)) {
                for (auto p : method_prerequisites(m, rules)) {
                    if (seen.insert(p).second) frontier.push_back(p);
                }
            }
        }
        std::sort(relevant.begin(), relevant.end());
        for (auto item : relevant) options.push_back(methods_for(item, rules));
    }
    auto slot_of = [&](ItemId item) {
        return static_cast<std::size_t>(std::lower_bound(relevant.begin(), relevant.end(), item) - relevant.begin());
    };

    std::size_t combos = 1;
    for (const auto& o : options) {
        combos *= std::max<std::size_t>(o.size(), 1);
        if (combos > 1'000'000) throw InfeasibleError("too many acquisition alternatives for exhaustive planning");
    }

    std::optional<Candidate> best;
    std::vector<std::size_t> choice(relevant.size(), 0);
    for (std::size_t combo = 0; combo < combos; ++combo) {
        std::size_t rest = combo;
        for (std::size_t i = 0; i < relevant.size(); ++i) {
            const auto n = std::max<std::size_t>(options[i].size(), 1);
            choice[i] = rest % n;
            rest /= n;
        }
        auto method = [&](std::size_t slot) -> const Method* {
            return options[slot].empty() ? nullptr : &options[slot][choice[slot]];
        };

        // Fixpoint: needs determine demands, demands determine needs. Stable
        // after at most |relevant| + 1 rounds on an acyclic assignment.
        std::vector<int> need(relevant.size(), 0);
        bool stable = false;
        for (std::size_t round = 0; round <= relevant.size() + 1 && !stable; ++round) {
            std::vector<int> consumed(relevant.size(), 0);
            std::vector<bool> held(relevant.size(), false);
            consumed[slot_of(target)] = 1;
            for (std::size_t i = 0; i < relevant.size(); ++i) {
                if (need[i] <= 0) continue;
                const auto* m = method(i);
                if (!m) continue;
                if (m->craft) {
                    const auto& r = rules.recipes()[m->rule];
                    const int crafts = ceil_div(need[i], r.count);
                    for (const auto& in : r.inputs) consumed[slot_of(in.item)] += crafts * in.count;
                    if (r.station) held[slot_of(*r.station)] = true;
                } else if (m->tool) {
                    held[slot_of(*m->tool)] = true;
                }
            }
            std::vector<int> next(relevant.size(), 0);
            for (std::size_t i = 0; i < relevant.size(); ++i) {
                const int total = consumed[i] + (held[i] ? 1 : 0);
                next[i] = std::max(0, total - inventory.count(relevant[i]));
            }
            stable = next == need;
            need = std::move(next);
        }
        if (!stable) continue;  // cyclic assignment

        bool feasible = true;
        std::vector<PlanNode> nodes;
        for (std::size_t i = 0; i < relevant.size() && feasible; ++i) {
            if (need[i] <= 0) continue;
            const auto* m = method(i);
            if (!m) {
                feasible = false;
                break;
            }
            SubTask t;
            t.item = relevant[i];
            t.step_budget = step_budget;
            if (m->craft) {
                const auto& r = rules.recipes()[m->rule];
                t.kind = SubTaskKind::craft;
                t.recipe = m->rule;
                t.target_count = inventory.count(t.item) + ceil_div(need[i], r.count) * r.count;
            } else {
                const auto& rule = rules.mining()[m->rule];
                t.kind = SubTaskKind::gather;
                t.source = rule.resource;
                t.tool = m->tool;
                t.strategy = rule.is_surface() ? Strategy::leave_biome : Strategy::dig_down;
                t.target_count = inventory.count(t.item) + need[i];
            }
            std::vector<ItemId> prereqs;
            for (auto p : method_prerequisites(*m, rules)) {
                if (need[slot_of(p)] > 0) prereqs.push_back(p);
            }
            nodes.push_back({t, prereqs});
        }
        if (!feasible) continue;

        Candidate cand;
        try {
            cand.tasks = canonical_order(std::move(nodes), rules);
        } catch (const InfeasibleError&) {
            continue;
        }
        for (const auto& t : cand.tasks) {
            const auto& m = *method(slot_of(t.item));
            const auto [kind, rule, tool] = m.key();
            cand.key.emplace_back(int(t.item.index), kind, rule, tool);
        }
        if (!best || cand.tasks.size() < best->tasks.size() ||
            (cand.tasks.size() == best->tasks.size() && cand.key < best->key)) {
            best = std::move(cand);
        }
    }

    if (!best) throw InfeasibleError("target '" + rules.name(target) + "' is unreachable from raw resources");
    return best->tasks;
}

}  // namespace ahce::craftworld
