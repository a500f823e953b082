#include <doctest.h>

#include "ahce/planner.hpp"

using namespace ahce;
using namespace ahce::planner;
using craftworld::Reason;

namespace {

std::shared_ptr<const RuleSet> rules() { return RuleSet::defaults(); }
ItemId id(const char* name) { return rules()->id(name); }
Inventory empty() { return Inventory(rules()->item_count()); }

bool contains(const Plan& p, const char* item) {
    for (const auto& t : p.subtasks) {
        if (t.item == id(item)) return true;
    }
    return false;
}

const SubTask& task_for(const Plan& p, const char* item) {
    for (const auto& t : p.subtasks) {
        if (t.item == id(item)) return t;
    }
    throw std::runtime_error("no sub-task");
}

std::vector<Rule> expressible_rules() {
    std::vector<Rule> out;
    for (const auto& m : rules()->mining()) {
        for (int tier = 0; tier <= 2; ++tier) out.push_back(ToolRule{m.resource, tier});
        for (auto s : {Strategy::surface_search, Strategy::dig_down, Strategy::leave_biome})
            out.push_back(HeuristicRule{m.resource, s});
    }
    for (std::size_t i = 0; i < rules()->item_count(); ++i) out.push_back(PrerequisiteRule{ItemId{std::uint16_t(i)}});
    return out;
}

}  // namespace

TEST_CASE("full knowledge reproduces the shortest plan for every target") {
    const auto kb = KnowledgeBase::full(rules());
    for (std::size_t i = 0; i < rules()->item_count(); ++i) {
        const ItemId target{std::uint16_t(i)};
        CAPTURE(rules()->name(target));
        std::vector<SubTask> oracle;
        try {
            oracle = craftworld::shortest_plan(target, empty(), *rules());
        } catch (const craftworld::InfeasibleError&) {
            CHECK_THROWS_AS(decompose(target, kb), PlannerStuck);
            continue;
        }
        CHECK(decompose(target, kb).subtasks == oracle);
    }
}

TEST_CASE("full knowledge matches the oracle from partial inventories") {
    const auto kb = KnowledgeBase::full(rules());
    craftworld::Rng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        auto inv = empty();
        for (const char* item : {"log", "plank", "stick", "crafting_table", "wooden_pickaxe", "cobblestone", "coal"})
            if (rng.below(3) == 0) inv.add(id(item), int(rng.below(4)));
        const ItemId target{std::uint16_t(rng.below(rules()->item_count()))};
        if (target == id("stone")) continue;
        CAPTURE(rules()->name(target));
        CHECK(decompose(target, kb, {}, inv).subtasks == craftworld::shortest_plan(target, inv, *rules()));
    }
}

TEST_CASE("without the tool-gating rule the planner mines stone bare-handed") {
    const KnowledgeBase kb(rules(), GapProfile::gap_fact(*rules()));
    const auto plan = decompose(id("stone_pickaxe"), kb);
    CHECK_FALSE(contains(plan, "wooden_pickaxe"));
    const auto& stone = task_for(plan, "cobblestone");
    CHECK_FALSE(stone.tool.has_value());
    CHECK(stone.strategy == Strategy::dig_down);
}

TEST_CASE("a tool injection puts the wooden pickaxe before mining") {
    const KnowledgeBase kb(rules(), GapProfile::gap_fact(*rules()));
    const ContextInjection inj{"use a wooden pickaxe for stone", {ToolRule{id("stone"), 1}}, false, {}};
    const auto plan = decompose(id("stone_pickaxe"), kb, {inj});
    std::size_t pickaxe = 99, stone = 99;
    for (std::size_t i = 0; i < plan.subtasks.size(); ++i) {
        if (plan.subtasks[i].item == id("wooden_pickaxe")) pickaxe = i;
        if (plan.subtasks[i].item == id("cobblestone")) stone = i;
    }
    CHECK(pickaxe < stone);
    CHECK(plan.subtasks[stone].tool == id("wooden_pickaxe"));
    CHECK(plan.provenance.injections == std::vector<std::string>{"use a wooden pickaxe for stone"});
}

TEST_CASE("without heuristics the planner searches the surface for stone and logs") {
    const KnowledgeBase kb(rules(), GapProfile::gap_strat(*rules()));
    const auto plan = decompose(id("stone_pickaxe"), kb);
    CHECK(task_for(plan, "cobblestone").strategy == Strategy::surface_search);
    CHECK(task_for(plan, "log").strategy == Strategy::surface_search);
    CHECK(task_for(plan, "cobblestone").tool == id("wooden_pickaxe"));
}

TEST_CASE("injection equivalence for every expressible rule") {
    for (const auto& profile : {GapProfile::full(), GapProfile::gap_fact(*rules()), GapProfile::gap_strat(*rules())}) {
        const KnowledgeBase kb(rules(), profile);
        for (const auto& r : expressible_rules()) {
            for (const char* target : {"stone_pickaxe", "torch", "chest", "iron_ingot"}) {
                CAPTURE(describe(r, *rules()));
                CAPTURE(target);
                const ContextInjection inj{"rule", {r}, false, {}};
                std::optional<Plan> a, b;
                try {
                    a = decompose(id(target), kb, {inj});
                } catch (const PlannerStuck&) {
                }
                try {
                    b = decompose(id(target), kb.with(r), {});
                } catch (const PlannerStuck&) {
                }
                REQUIRE(a.has_value() == b.has_value());
                if (a) CHECK(a->subtasks == b->subtasks);
            }
        }
    }
}

TEST_CASE("restoring a withheld recipe or mining rule never lengthens the plan") {
    std::vector<std::string> option_ids;
    for (const auto& rid : all_rule_ids(*rules())) {
        if (rid.rfind("recipe:", 0) == 0 || rid.rfind("mine:", 0) == 0) option_ids.push_back(rid);
    }
    craftworld::Rng rng(23);
    int compared = 0;
    for (int trial = 0; trial < 80; ++trial) {
        GapProfile gapped{"random", {}};
        for (const auto& rid : option_ids) {
            if (rng.below(4) == 0) gapped.withheld.insert(rid);
        }
        for (const auto& restored : gapped.withheld) {
            GapProfile fuller = gapped;
            fuller.withheld.erase(restored);
            for (const char* target : {"stone_pickaxe", "torch", "chest", "bowl"}) {
                std::optional<std::size_t> before, after;
                try {
                    before = decompose(id(target), KnowledgeBase(rules(), gapped)).subtasks.size();
                } catch (const PlannerStuck&) {
                }
                try {
                    after = decompose(id(target), KnowledgeBase(rules(), fuller)).subtasks.size();
                } catch (const PlannerStuck&) {
                }
                if (before) {
                    REQUIRE(after.has_value());
                    CHECK(*after <= *before);
                    ++compared;
                }
            }
        }
    }
    CHECK(compared > 50);
}

TEST_CASE("heuristic rules change strategies but not plan length") {
    const KnowledgeBase kb(rules(), GapProfile::gap_strat(*rules()));
    const auto base = decompose(id("stone_pickaxe"), kb);
    const auto with = decompose(id("stone_pickaxe"), kb.with(HeuristicRule{id("stone"), Strategy::dig_down}));
    CHECK(base.subtasks.size() == with.subtasks.size());
    CHECK(task_for(with, "cobblestone").strategy == Strategy::dig_down);
}

TEST_CASE("prerequisite rules add the item to the plan") {
    const auto kb = KnowledgeBase::full(rules());
    const auto plan = decompose(id("stick"), kb.with(PrerequisiteRule{id("crafting_table")}));
    CHECK(contains(plan, "crafting_table"));
    CHECK(contains(plan, "stick"));
}

TEST_CASE("expired injections stop shaping plans") {
    const KnowledgeBase kb(rules(), GapProfile::gap_fact(*rules()));
    std::vector<ContextInjection> injections{{"use a wooden pickaxe for stone", {ToolRule{id("stone"), 1}}, false, 1}};
    CHECK(contains(decompose(id("stone_pickaxe"), kb, injections), "wooden_pickaxe"));
    tick(injections);
    CHECK_FALSE(injections.front().active());
    CHECK_FALSE(contains(decompose(id("stone_pickaxe"), kb, injections), "wooden_pickaxe"));
}

TEST_CASE("untyped injections do not change the plan") {
    const KnowledgeBase kb(rules(), GapProfile::gap_fact(*rules()));
    const ContextInjection inj{"stone is tricky", {}, true, {}};
    CHECK(decompose(id("stone_pickaxe"), kb, {inj}).subtasks == decompose(id("stone_pickaxe"), kb).subtasks);
}

TEST_CASE("withholding every recipe for the target leaves the planner stuck") {
    GapProfile p{"no-table", {"recipe:crafting_table"}};
    const KnowledgeBase kb(rules(), p);
    CHECK_THROWS_AS(decompose(id("wooden_pickaxe"), kb), PlannerStuck);
    CHECK_THROWS_AS(KnowledgeBase(rules(), GapProfile{"bad", {"recipe:diamond"}}), craftworld::ConfigError);
}

TEST_CASE("gap profiles round-trip through the fixture files") {
    const auto dir = std::filesystem::path(AHCE_TEST_DATA) / "gaps";
    CHECK(GapProfile::from_file(dir / "gap_fact.json") == GapProfile::gap_fact(*rules()));
    CHECK(GapProfile::from_file(dir / "gap_strat.json") == GapProfile::gap_strat(*rules()));
    CHECK(GapProfile::from_file(dir / "full.json") == GapProfile::full());
    CHECK(GapProfile::by_name("GAP-FACT", *rules()) == GapProfile::gap_fact(*rules()));
    CHECK_THROWS_AS(GapProfile::by_name("GAP-X", *rules()), craftworld::ConfigError);
}

TEST_CASE("self_correct retries a surface search for logs with a wider radius") {
    const KnowledgeBase kb(rules(), GapProfile::gap_strat(*rules()));
    const auto plan = decompose(id("stone_pickaxe"), kb);
    REQUIRE(plan.subtasks.front().item == id("log"));
    const auto fixed = self_correct(plan, craftworld::Outcome::fail(Reason::resource_absent, id("log")), kb, empty());
    CHECK(fixed.subtasks.size() == plan.subtasks.size());
    CHECK(fixed.subtasks.front().item == id("log"));
    CHECK(fixed.subtasks.front().search_attempt == 1);
    CHECK(fixed.subtasks.front().strategy == Strategy::surface_search);
}

TEST_CASE("self_correct replans missing craft inputs") {
    const auto kb = KnowledgeBase::full(rules());
    auto inv = empty();
    inv.add(id("crafting_table"));
    inv.add(id("plank"), 3);
    Plan remaining{id("wooden_pickaxe"), {}, {}};
    SubTask craft;
    craft.item = id("wooden_pickaxe");
    craft.recipe = 6;
    remaining.subtasks.push_back(craft);
    const auto fixed = self_correct(remaining, craftworld::Outcome::fail(Reason::missing_inputs, id("wooden_pickaxe")), kb, inv);
    REQUIRE(fixed.subtasks.size() >= 2);
    CHECK(contains(fixed, "stick"));
    CHECK(fixed.subtasks.back().item == id("wooden_pickaxe"));
}

TEST_CASE("three self-corrections leave a tool-gated failure unresolved") {
    const KnowledgeBase kb(rules(), GapProfile::gap_fact(*rules()));
    auto inv = empty();
    inv.add(id("stick"), 2);
    inv.add(id("crafting_table"));
    auto plan = decompose(id("stone_pickaxe"), kb, {}, inv);
    REQUIRE(plan.subtasks.front().item == id("cobblestone"));
    for (int i = 1; i <= 3; ++i) {
        plan = self_correct(plan, craftworld::Outcome::fail(Reason::tool_tier_insufficient, id("stone")), kb, inv);
        CHECK(plan.subtasks.front().item == id("cobblestone"));
        CHECK_FALSE(plan.subtasks.front().tool.has_value());
        CHECK(plan.subtasks.front().search_attempt == i);
    }
    CHECK_FALSE(contains(plan, "wooden_pickaxe"));
}

TEST_CASE("self_correct on a tool failure replans once the tier is known") {
    const KnowledgeBase kb = KnowledgeBase(rules(), GapProfile::gap_fact(*rules())).with(ToolRule{id("stone"), 1});
    auto inv = empty();
    inv.add(id("stick"), 2);
    inv.add(id("crafting_table"));
    Plan remaining{id("stone_pickaxe"), {}, {}};
    SubTask gather;
    gather.kind = craftworld::SubTaskKind::gather;
    gather.item = id("cobblestone");
    gather.source = id("stone");
    gather.target_count = 3;
    remaining.subtasks.push_back(gather);
    const auto fixed = self_correct(remaining, craftworld::Outcome::fail(Reason::tool_tier_insufficient, id("stone")), kb, inv);
    CHECK(contains(fixed, "wooden_pickaxe"));
}
