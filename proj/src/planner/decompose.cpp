// Depth-first search over acquisition methods the knowledge base believes in,
// scoring each complete assignment by demand propagation in topological order.

#include "ahce/planner.hpp"

#include <algorithm>
#include <functional>
#include <tuple>

namespace ahce::planner {

namespace {

using craftworld::PlanNode;
using craftworld::SubTaskKind;

struct Method {
    bool craft = false;
    std::size_t rule = 0;
    std::optional<ItemId> tool;
};

struct Believed {
    const KnowledgeBase& kb;

    std::vector<Method> methods(ItemId item) const {
        const auto& rules = kb.rules();
        std::vector<Method> out;
        const auto recipes = rules.recipes();
        for (std::size_t i = 0; i < recipes.size(); ++i) {
            if (recipes[i].output == item && kb.knows_recipe(i)) out.push_back({true, i, std::nullopt});
        }
        const auto mining = rules.mining();
        for (std::size_t i = 0; i < mining.size(); ++i) {
            if (mining[i].drop != item || !kb.knows_mining(mining[i].resource)) continue;
            const int tier = kb.believed_tier(mining[i].resource);
            if (tier <= craftworld::kHandTier) {
                out.push_back({false, i, std::nullopt});
            } else {
                for (auto tool : rules.tools_with_tier_at_least(tier)) out.push_back({false, i, tool});
            }
        }
        return out;
    }

    std::vector<ItemId> prerequisites(const Method& m) const {
        std::vector<ItemId> out;
        if (m.craft) {
            const auto& r = kb.rules().recipes()[m.rule];
            for (const auto& in : r.inputs) out.push_back(in.item);
            if (r.station) out.push_back(*r.station);
        } else if (m.tool) {
            out.push_back(*m.tool);
        }
        return out;
    }
};

using Key = std::vector<std::tuple<int, int, std::size_t, int>>;

struct Best {
    std::vector<SubTask> tasks;
    Key key;
    std::map<ItemId, Method> methods;
};

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

Plan decompose(ItemId target, const KnowledgeBase& base_kb, const std::vector<ContextInjection>& injections,
               const Inventory& inventory, int step_budget) {
    const auto& rules = base_kb.rules();
    rules.check(target);
    const KnowledgeBase kb = effective_knowledge(base_kb, injections);
    const Believed believed{kb};

    std::vector<ItemId> roots{target};
    for (auto p : kb.prerequisites()) {
        if (p != target) roots.push_back(p);
    }

    Plan plan;
    plan.target = target;
    for (const auto& inj : injections) {
        if (inj.active()) plan.provenance.injections.push_back(inj.text);
    }

    std::map<ItemId, std::vector<Method>> option_cache;
    auto options = [&](ItemId item) -> const std::vector<Method>& {
        auto it = option_cache.find(item);
        if (it == option_cache.end()) it = option_cache.emplace(item, believed.methods(item)).first;
        return it->second;
    };

    std::optional<Best> best;
    std::map<ItemId, std::optional<Method>> assign;

    auto evaluate = [&]() {
        // Reverse post-order from the roots puts every consumer before its inputs.
        std::map<ItemId, int> mark;
        std::vector<ItemId> post;
        bool cyclic = false;
        std::function<void(ItemId)> visit = [&](ItemId v) {
            if (cyclic || mark[v] == 2) return;
            if (mark[v] == 1) {
                cyclic = true;
                return;
            }
            mark[v] = 1;
            if (const auto& m = assign.at(v)) {
                for (auto p : believed.prerequisites(*m)) visit(p);
            }
            mark[v] = 2;
            post.push_back(v);
        };
        for (auto r : roots) visit(r);
        if (cyclic) return;

        std::map<ItemId, int> consumed;
        std::map<ItemId, bool> held;
        std::map<ItemId, int> need;
        consumed[target] = 1;
        for (auto p : kb.prerequisites()) held[p] = true;
        for (auto it = post.rbegin(); it != post.rend(); ++it) {
            const auto v = *it;
            const int n = std::max(0, consumed[v] + (held[v] ? 1 : 0) - inventory.count(v));
            need[v] = n;
            if (n == 0) continue;
            const auto& m = assign.at(v);
            if (!m) return;
            if (m->craft) {
                const auto& r = rules.recipes()[m->rule];
                const int crafts = ceil_div(n, r.count);
                for (const auto& in : r.inputs) consumed[in.item] += crafts * in.count;
                if (r.station) held[*r.station] = true;
            } else if (m->tool) {
                held[*m->tool] = true;
            }
        }

        std::vector<PlanNode> nodes;
        for (auto v : post) {
            if (need[v] == 0) continue;
            const auto& m = *assign.at(v);
            SubTask t;
            t.item = v;
            t.step_budget = step_budget;
            if (m.craft) {
                const auto& r = rules.recipes()[m.rule];
                t.kind = SubTaskKind::craft;
                t.recipe = m.rule;
                t.target_count = inventory.count(v) + ceil_div(need[v], r.count) * r.count;
            } else {
                const auto& rule = rules.mining()[m.rule];
                t.kind = SubTaskKind::gather;
                t.source = rule.resource;
                t.tool = m.tool;
                t.strategy = kb.believed_strategy(rule.resource);
                t.target_count = inventory.count(v) + need[v];
            }
            std::vector<ItemId> prereqs;
            for (auto p : believed.prerequisites(m)) {
                if (need[p] > 0) prereqs.push_back(p);
            }
            nodes.push_back({t, prereqs});
        }
        std::sort(nodes.begin(), nodes.end(),
                  [](const PlanNode& a, const PlanNode& b) { return a.task.item < b.task.item; });

        std::vector<SubTask> ordered;
        try {
            ordered = craftworld::canonical_order(std::move(nodes), rules);
        } catch (const craftworld::InfeasibleError&) {
            return;
        }
        Key key;
        for (const auto& t : ordered) {
            const auto& m = *assign.at(t.item);
            key.emplace_back(int(t.item.index), m.craft ? 1 : 0, m.rule, m.tool ? int(m.tool->index) : -1);
        }
        if (!best || ordered.size() < best->tasks.size() ||
            (ordered.size() == best->tasks.size() && key < best->key)) {
            std::map<ItemId, Method> used;
            for (const auto& t : ordered) used.emplace(t.item, *assign.at(t.item));
            best = Best{std::move(ordered), std::move(key), std::move(used)};
        }
    };

    std::function<void()> explore = [&]() {
        // Smallest reached item without a chosen method.
        std::optional<ItemId> open;
        for (const auto& [item, m] : assign) {
            if (!m && !options(item).empty()) {
                open = item;
                break;
            }
        }
        if (!open) {
            evaluate();
            return;
        }
        const auto item = *open;
        for (const auto& m : options(item)) {
            std::vector<ItemId> added;
            for (auto p : believed.prerequisites(m)) {
                if (!assign.count(p)) {
                    assign.emplace(p, std::nullopt);
                    added.push_back(p);
                }
            }
            assign[item] = m;
            explore();
            assign[item] = std::nullopt;
            for (auto p : added) assign.erase(p);
        }
    };

    for (auto r : roots) assign.emplace(r, std::nullopt);
    if (std::all_of(roots.begin(), roots.end(), [&](ItemId r) { return inventory.has(r); })) return plan;
    explore();

    if (!best) throw PlannerStuck("no plan for '" + rules.name(target) + "' under gap profile " +
                                  kb.gap_profile().name);

    plan.subtasks = std::move(best->tasks);
    for (const auto& t : plan.subtasks) {
        const auto& m = best->methods.at(t.item);
        if (m.craft) {
            plan.provenance.rule_ids.push_back(recipe_rule_id(m.rule, rules));
            continue;
        }
        const auto resource = *t.source;
        plan.provenance.rule_ids.push_back("mine:" + rules.name(resource));
        if (t.tool && kb.knows("tier:" + rules.name(resource))) plan.provenance.rule_ids.push_back("tier:" + rules.name(resource));
        if (t.strategy != Strategy::surface_search) {
            plan.provenance.rule_ids.push_back("heuristic:" + rules.name(resource) + ":" +
                                               std::string(craftworld::to_string(t.strategy)));
        }
    }
    return plan;
}

Plan decompose(ItemId target, const KnowledgeBase& kb, const std::vector<ContextInjection>& injections) {
    return decompose(target, kb, injections, Inventory(kb.rules().item_count()));
}

Plan self_correct(const Plan& remaining, const craftworld::Outcome& failure, const KnowledgeBase& kb,
                  const Inventory& inventory) {
    using craftworld::Reason;
    const int budget = remaining.subtasks.empty() ? 200 : remaining.subtasks.front().step_budget;
    auto replan = [&]() -> std::optional<Plan> {
        try {
            auto p = decompose(remaining.target, kb, {}, inventory, budget);
            p.provenance.injections = remaining.provenance.injections;
            return p;
        } catch (const PlannerStuck&) {
            return std::nullopt;
        }
    };

    if (remaining.subtasks.empty()) return replan().value_or(remaining);

    const auto& front = remaining.subtasks.front();
    bool rebuild = failure.reason == Reason::missing_inputs || failure.reason == Reason::missing_station ||
                   failure.reason == Reason::not_craftable;
    if (failure.reason == Reason::tool_tier_insufficient && front.source) {
        rebuild = kb.believed_tier(*front.source) > kb.rules().best_tier(inventory);
    }
    if (rebuild) {
        if (auto p = replan()) return *p;
    }

    Plan out = remaining;
    auto& t = out.subtasks.front();
    t.search_attempt += 1;
    if (t.source) t.strategy = kb.believed_strategy(*t.source);
    return out;
}

}  // namespace ahce::planner
