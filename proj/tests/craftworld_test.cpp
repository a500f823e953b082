#include <doctest.h>

#include <deque>
#include <set>

#include "ahce/craftworld.hpp"

using namespace ahce::craftworld;

namespace {

const RuleSet& rules() { return *RuleSet::defaults(); }

ItemId id(const char* name) { return rules().id(name); }

WorldState empty_state(int depth = 0) {
    WorldConfig cfg;
    cfg.width = cfg.height = 8;
    cfg.chunk_size = 8;
    cfg.mix = {1.0, 0.0, 0.0};
    auto s = spawn_world(3, cfg, rules());
    s.agent_depth = depth;
    return s;
}

std::vector<std::uint64_t> cell_digest(const WorldState& s) {
    std::vector<std::uint64_t> out;
    for (const auto& c : s.terrain->cells) out.push_back((std::uint64_t(std::uint16_t(c.resource)) << 16) | std::uint16_t(c.units));
    return out;
}

}  // namespace

TEST_CASE("default rules match the shipped tech tree file") {
    const auto file = RuleSet::from_file(std::filesystem::path(AHCE_TEST_DATA) / "techtree.json");
    CHECK(file == rules());
    CHECK(RuleSet::from_json(rules().to_json()) == rules());
}

TEST_CASE("unknown names and malformed rule files are rejected") {
    CHECK_THROWS_AS(rules().id("diamond"), DomainError);
    CHECK_THROWS_AS(RuleSet::from_json(nlohmann::json::parse(R"({"items":["a"],"recipes":[{"output":"b","inputs":[]}]})")),
                    ConfigError);
    CHECK_THROWS_AS(RuleSet::from_file("/nonexistent/techtree.json"), ConfigError);
}

TEST_CASE("spawn_world is deterministic per seed") {
    WorldConfig cfg;
    const auto a = spawn_world(7, cfg, rules());
    const auto b = spawn_world(7, cfg, rules());
    CHECK(a == b);
    CHECK(*a.terrain == *b.terrain);
    const auto c = spawn_world(8, cfg, rules());
    CHECK(cell_digest(a) != cell_digest(c));
}

TEST_CASE("pure desert world has no trees") {
    WorldConfig cfg;
    cfg.mix = {0.0, 0.0, 1.0};
    const auto s = spawn_world(7, cfg, rules());
    const auto log = id("log");
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            CHECK(s.biome_at({x, y}) == Biome::desert);
            for (int d = 0; d <= cfg.max_depth; ++d) CHECK(s.resource_at({x, y}, d) != log);
        }
    }
}

TEST_CASE("generated resources respect their depth bands") {
    WorldConfig cfg;
    const auto s = spawn_world(7, cfg, rules());
    int stone_cells = 0;
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            for (int d = 0; d <= cfg.max_depth; ++d) {
                const auto r = s.resource_at({x, y}, d);
                if (!r) continue;
                const auto* rule = rules().mining_for_resource(*r);
                REQUIRE(rule != nullptr);
                CHECK(rule->in_band(d));
                if (*r == id("stone")) ++stone_cells;
            }
        }
    }
    CHECK(stone_cells > 0);
}

TEST_CASE("desert chunks never border desert to the east") {
    WorldConfig cfg;
    cfg.mix = {0.2, 0.1, 0.7};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = spawn_world(seed, cfg, rules());
        for (int y = 0; y < cfg.height; y += cfg.chunk_size) {
            for (int x = 0; x < cfg.width; x += cfg.chunk_size) {
                if (s.biome_at({x, y}) != Biome::desert) continue;
                CHECK(s.biome_at(s.wrap({x + cfg.chunk_size, y})) != Biome::desert);
            }
        }
    }
}

TEST_CASE("centered spawn starts in the middle of a chunk of the spawn biome") {
    WorldConfig cfg;
    cfg.spawn_biome = Biome::desert;
    cfg.spawn_centered = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = spawn_world(seed, cfg, rules());
        CHECK(s.current_biome() == Biome::desert);
        CHECK(s.agent_pos.x % cfg.chunk_size == cfg.chunk_size / 2);
        CHECK(s.agent_pos.y % cfg.chunk_size == cfg.chunk_size / 2);
    }
}

TEST_CASE("mining stone bare-handed fails on tool tier") {
    auto s = empty_state(3);
    REQUIRE(s.resource_at(s.agent_pos, 3) == id("stone"));
    const auto r = step(s, Mine{id("stone")}, rules());
    CHECK_FALSE(r.outcome.success);
    CHECK(r.outcome.reason == Reason::tool_tier_insufficient);
    CHECK(r.state.inventory == s.inventory);
    CHECK(r.state.step_count == s.step_count + 1);
}

TEST_CASE("mining an absent resource reports resource_absent") {
    auto s = empty_state(0);
    s.inventory.add(id("wooden_pickaxe"));
    const auto r = step(s, Mine{id("stone")}, rules());
    CHECK(r.outcome.reason == Reason::resource_absent);
}

TEST_CASE("crafting table consumes four planks") {
    auto s = empty_state();
    s.inventory.add(id("plank"), 4);
    const auto r = step(s, Craft{id("crafting_table")}, rules());
    CHECK(r.outcome.success);
    CHECK(r.state.inventory.count(id("crafting_table")) == 1);
    CHECK(r.state.inventory.count(id("plank")) == 0);
}

TEST_CASE("craft failures name their cause") {
    auto s = empty_state();
    CHECK(step(s, Craft{id("plank")}, rules()).outcome.reason == Reason::missing_inputs);
    CHECK(step(s, Craft{id("log")}, rules()).outcome.reason == Reason::not_craftable);
    s.inventory.add(id("plank"), 3);
    s.inventory.add(id("stick"), 2);
    CHECK(step(s, Craft{id("wooden_pickaxe")}, rules()).outcome.reason == Reason::missing_station);
}

TEST_CASE("climbing above the surface is blocked and digging stops at max depth") {
    auto s = empty_state(0);
    CHECK(step(s, ClimbUp{}, rules()).outcome.reason == Reason::blocked);
    s.agent_depth = s.terrain->max_depth;
    CHECK(step(s, DigDown{}, rules()).outcome.reason == Reason::blocked);
}

TEST_CASE("oversized moves are domain errors and do not advance the clock") {
    auto s = empty_state();
    CHECK_THROWS_AS(apply_action(s, Move{2, 0}, rules()), DomainError);
    CHECK(s.step_count == 0);
    CHECK_THROWS_AS(apply_action(s, Mine{ItemId{999}}, rules()), DomainError);
}

TEST_CASE("dig down into the stone band then mine with a wooden pickaxe") {
    auto s = empty_state(0);
    s.inventory.add(id("wooden_pickaxe"));
    const auto* stone = rules().mining_for_resource(id("stone"));
    while (!stone->in_band(s.agent_depth)) REQUIRE(apply_action(s, DigDown{}, rules()).success);
    CHECK(s.agent_depth == stone->depth_min);
    const int units = s.units_at(s.agent_pos, s.agent_depth);
    const auto out = apply_action(s, Mine{id("stone")}, rules());
    CHECK(out.success);
    CHECK(s.inventory.count(id("cobblestone")) == 1);
    CHECK(s.units_at(s.agent_pos, s.agent_depth) == units - 1);
}

TEST_CASE("crafting conserves recipe inputs and mining adds one unit") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto s = empty_state(static_cast<int>(rng.below(4)));
        for (std::size_t i = 0; i < rules().item_count(); ++i) s.inventory.add(ItemId{std::uint16_t(i)}, int(rng.below(5)));
        const auto item = ItemId{std::uint16_t(rng.below(rules().item_count()))};
        const Action a = rng.below(2) ? Action{Craft{item}} : Action{Mine{item}};
        const auto before = s.inventory;
        const auto out = apply_action(s, a, rules());
        if (!out.success) {
            CHECK(s.inventory == before);
            continue;
        }
        if (const auto* c = std::get_if<Craft>(&a)) {
            const auto* recipe = rules().recipes_for(c->item).front();
            CHECK(s.inventory.count(c->item) == before.count(c->item) + recipe->count);
            for (const auto& in : recipe->inputs) CHECK(s.inventory.count(in.item) == before.count(in.item) - in.count);
        } else {
            const auto drop = rules().mining_for_resource(item)->drop;
            CHECK(s.inventory.count(drop) == before.count(drop) + 1);
        }
    }
}

TEST_CASE("step replays identically") {
    WorldConfig cfg;
    const auto start = spawn_world(21, cfg, rules());
    Rng rng(5);
    std::vector<Action> actions;
    for (int i = 0; i < 300; ++i) {
        switch (rng.below(4)) {
            case 0: actions.push_back(Move{int(rng.below(3)) - 1, int(rng.below(3)) - 1}); break;
            case 1: actions.push_back(DigDown{}); break;
            case 2: actions.push_back(ClimbUp{}); break;
            default: actions.push_back(Mine{id("log")}); break;
        }
    }
    auto a = start, b = start;
    for (const auto& act : actions) {
        apply_action(a, act, rules());
        b = step(b, act, rules()).state;
    }
    CHECK(a == b);
}

TEST_CASE("no cobblestone before a wooden pickaxe: exhaustive search on a one-column world") {
    WorldConfig cfg;
    cfg.width = cfg.height = 8;
    cfg.chunk_size = 8;
    cfg.mix = {1.0, 0.0, 0.0};
    cfg.tree_density_forest = 1.0;
    cfg.logs_per_tree = 64;
    cfg.max_depth = 2;
    cfg.ores.clear();
    const auto start = spawn_world(1, cfg, rules());

    std::vector<Action> actions{DigDown{}, ClimbUp{}, Mine{id("log")}, Mine{id("stone")}};
    for (const char* c : {"plank", "stick", "crafting_table", "wooden_pickaxe"}) actions.push_back(Craft{id(c)});

    auto key = [](const WorldState& s) {
        std::vector<int> k(s.inventory.counts().begin(), s.inventory.counts().end());
        k.push_back(s.agent_depth);
        return k;
    };
    std::set<std::vector<int>> seen{key(start)};
    std::deque<std::pair<WorldState, int>> frontier{{start, 0}};
    bool reached_cobblestone = false;
    const auto cobble = id("cobblestone");
    while (!frontier.empty()) {
        auto [s, depth] = frontier.front();
        frontier.pop_front();
        if (s.inventory.has(cobble)) {
            reached_cobblestone = true;
            CHECK(rules().best_tier(s.inventory) >= 1);
        }
        if (depth == 12) continue;
        for (const auto& a : actions) {
            auto next = step(s, a, rules());
            if (!next.outcome.success) continue;
            if (seen.insert(key(next.state)).second) frontier.emplace_back(std::move(next.state), depth + 1);
        }
    }
    CHECK(reached_cobblestone);
}

TEST_CASE("a desert-bound agent never collects a log") {
    WorldConfig cfg;
    cfg.mix = {0.0, 0.0, 1.0};
    auto s = spawn_world(9, cfg, rules());
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const Action a = rng.below(2) ? Action{Move{int(rng.below(3)) - 1, int(rng.below(3)) - 1}} : Action{Mine{id("log")}};
        apply_action(s, a, rules());
        REQUIRE(s.current_biome() == Biome::desert);
    }
    CHECK(s.inventory.count(id("log")) == 0);
}

TEST_CASE("shortest plans fall in their level bands") {
    const Inventory empty(rules().item_count());
    const auto table = shortest_plan(id("crafting_table"), empty, rules());
    CHECK(table.size() >= 1);
    CHECK(table.size() <= 3);
    CHECK(level_for_plan_length(table.size()) == TaskLevel::easy);
    const auto pickaxe = shortest_plan(id("stone_pickaxe"), empty, rules());
    CHECK(pickaxe.size() >= 6);
    CHECK(pickaxe.size() <= 9);
    CHECK(level_for_plan_length(pickaxe.size()) == TaskLevel::hard);
}

TEST_CASE("shortest plan is empty when the target is held") {
    Inventory inv(rules().item_count());
    inv.add(id("stone_pickaxe"));
    CHECK(shortest_plan(id("stone_pickaxe"), inv, rules()).empty());
}

TEST_CASE("stone pickaxe plan acquires the wooden pickaxe before mining stone") {
    const auto plan = shortest_plan(id("stone_pickaxe"), Inventory(rules().item_count()), rules());
    std::size_t pickaxe = plan.size(), stone = plan.size();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].item == id("wooden_pickaxe")) pickaxe = i;
        if (plan[i].item == id("cobblestone")) {
            stone = i;
            CHECK(plan[i].tool == id("wooden_pickaxe"));
            CHECK(plan[i].strategy == Strategy::dig_down);
        }
    }
    CHECK(pickaxe < stone);
    CHECK(stone < plan.size());
}

TEST_CASE("level bands by plan length") {
    CHECK_FALSE(level_for_plan_length(0).has_value());
    CHECK(level_for_plan_length(3) == TaskLevel::easy);
    CHECK(level_for_plan_length(4) == TaskLevel::normal);
    CHECK(level_for_plan_length(5) == TaskLevel::normal);
    CHECK(level_for_plan_length(6) == TaskLevel::hard);
    CHECK(level_for_plan_length(9) == TaskLevel::hard);
    CHECK_FALSE(level_for_plan_length(10).has_value());
}

TEST_CASE("rng is reproducible and bounded") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.below(7);
        CHECK(x == b.below(7));
        CHECK(x < 7);
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}
