#include "ahce/harness.hpp"

#include <cstdlib>
#include <fstream>

namespace ahce::harness {

namespace {

using nlohmann::json;

craftworld::WorldConfig easy_world() {
    craftworld::WorldConfig w;
    w.mix = {0.7, 0.3, 0.0};
    w.spawn_biome = craftworld::Biome::forest;
    return w;
}

craftworld::WorldConfig normal_world() {
    craftworld::WorldConfig w;
    w.mix = {0.5, 0.3, 0.2};
    return w;
}

craftworld::WorldConfig hard_world() {
    craftworld::WorldConfig w;
    w.width = w.height = 80;
    w.chunk_size = 20;
    w.spawn_biome = craftworld::Biome::desert;
    w.spawn_centered = true;
    return w;
}

TaskLevel level_from_string(const std::string& s) {
    if (s == "Easy") return TaskLevel::easy;
    if (s == "Normal") return TaskLevel::normal;
    if (s == "Hard") return TaskLevel::hard;
    throw craftworld::ConfigError("unknown task level: " + s);
}

}  // namespace

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("AHCE_DATA_DIR"); env && *env) return env;
    return AHCE_DATA_DIR;
}

std::vector<TaskSpec> default_suite(const RuleSet& rules) {
    struct Row {
        const char* target;
        TaskLevel level;
    };
    const Row rows[] = {
        {"log", TaskLevel::easy},           {"plank", TaskLevel::easy},          {"stick", TaskLevel::easy},
        {"crafting_table", TaskLevel::easy}, {"wooden_button", TaskLevel::easy}, {"wooden_pickaxe", TaskLevel::normal},
        {"wooden_sword", TaskLevel::normal}, {"wooden_axe", TaskLevel::normal},  {"bowl", TaskLevel::normal},
        {"chest", TaskLevel::normal},        {"stone_pickaxe", TaskLevel::hard}, {"stone_sword", TaskLevel::hard},
        {"stone_axe", TaskLevel::hard},      {"furnace", TaskLevel::hard},       {"torch", TaskLevel::hard},
    };
    std::vector<TaskSpec> suite;
    for (const auto& r : rows) {
        TaskSpec t;
        t.id = std::string("craft_") + r.target;
        t.target = rules.id(r.target);
        t.level = r.level;
        switch (r.level) {
            case TaskLevel::easy:
                t.episode_step_budget = 400;
                t.world = easy_world();
                break;
            case TaskLevel::normal:
                t.episode_step_budget = 1200;
                t.world = normal_world();
                break;
            case TaskLevel::hard:
                t.episode_step_budget = 1800;
                t.world = hard_world();
                break;
        }
        suite.push_back(std::move(t));
    }
    return suite;
}

json TaskSpec::to_json(const RuleSet& rules) const {
    return {{"id", id},
            {"target", rules.name(target)},
            {"level", std::string(craftworld::to_string(level))},
            {"episode_step_budget", episode_step_budget},
            {"world", world.to_json()},
            {"gap_profile", gap_profile}};
}

TaskSpec TaskSpec::from_json(const json& doc, const RuleSet& rules) {
    TaskSpec t;
    try {
        t.id = doc.at("id").get<std::string>();
        t.target = rules.id(doc.at("target").get<std::string>());
        t.level = level_from_string(doc.at("level").get<std::string>());
        t.episode_step_budget = doc.value("episode_step_budget", t.episode_step_budget);
        if (doc.contains("world")) t.world = craftworld::WorldConfig::from_json(doc.at("world"));
        t.gap_profile = doc.value("gap_profile", t.gap_profile);
    } catch (const json::exception& e) {
        throw craftworld::ConfigError(std::string("task definition: ") + e.what());
    }
    if (t.episode_step_budget < 1) throw craftworld::ConfigError("episode step budget must be positive");
    const auto len = craftworld::shortest_plan(t.target, craftworld::Inventory(rules.item_count()), rules).size();
    if (craftworld::level_for_plan_length(len) != t.level)
        throw craftworld::ConfigError("task " + t.id + ": level does not match shortest plan length " +
                                      std::to_string(len));
    return t;
}

std::vector<TaskSpec> load_suite(const std::filesystem::path& path, const RuleSet& rules) {
    std::ifstream in(path);
    if (!in) throw craftworld::ConfigError("cannot open task suite: " + path.string());
    const auto doc = json::parse(in);
    std::vector<TaskSpec> out;
    for (const auto& t : doc.at("tasks")) out.push_back(TaskSpec::from_json(t, rules));
    return out;
}

const TaskSpec& find_task(const std::vector<TaskSpec>& suite, const std::string& id) {
    for (const auto& t : suite) {
        if (t.id == id) return t;
    }
    throw craftworld::DomainError("unknown task: " + id);
}

planner::GapProfile resolve_profile(const TaskSpec& task, std::uint64_t seed, const RuleSet& rules) {
    if (task.gap_profile == "MIXED")
        return seed % 2 == 0 ? planner::GapProfile::gap_fact(rules) : planner::GapProfile::gap_strat(rules);
    return planner::GapProfile::by_name(task.gap_profile, rules);
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::log: return "log";
        case Variant::full: return "full";
    }
    return "full";
}

Variant variant_from_string(std::string_view s) {
    if (s == "baseline") return Variant::baseline;
    if (s == "log") return Variant::log;
    if (s == "full") return Variant::full;
    throw craftworld::ConfigError("unknown variant: " + std::string(s));
}

}  // namespace ahce::harness
