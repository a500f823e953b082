#include "ahce/craftworld.hpp"

namespace ahce::craftworld {

namespace {

// Mirrors data/techtree.json.
constexpr const char* kDefaultTechTree = R"json(
{
  "items": [
    "log",
    "plank",
    "stick",
    "crafting_table",
    "wooden_button",
    "bowl",
    "chest",
    {"name": "wooden_pickaxe", "tool_tier": 1},
    "wooden_sword",
    "wooden_axe",
    "stone",
    "cobblestone",
    {"name": "stone_pickaxe", "tool_tier": 2},
    "stone_sword",
    "stone_axe",
    "furnace",
    "coal",
    "torch",
    "iron_ore",
    "iron_ingot"
  ],
  "recipes": [
    {"output": "plank", "count": 4, "inputs": [{"item": "log", "count": 1}]},
    {"output": "stick", "count": 4, "inputs": [{"item": "plank", "count": 2}]},
    {"output": "crafting_table", "count": 1, "inputs": [{"item": "plank", "count": 4}]},
    {"output": "wooden_button", "count": 1, "inputs": [{"item": "plank", "count": 1}]},
    {"output": "bowl", "count": 4, "inputs": [{"item": "plank", "count": 3}], "station": "crafting_table"},
    {"output": "chest", "count": 1, "inputs": [{"item": "plank", "count": 8}], "station": "crafting_table"},
    {"output": "wooden_pickaxe", "count": 1, "inputs": [{"item": "plank", "count": 3}, {"item": "stick", "count": 2}], "station": "crafting_table"},
    {"output": "wooden_sword", "count": 1, "inputs": [{"item": "plank", "count": 2}, {"item": "stick", "count": 1}], "station": "crafting_table"},
    {"output": "wooden_axe", "count": 1, "inputs": [{"item": "plank", "count": 3}, {"item": "stick", "count": 2}], "station": "crafting_table"},
    {"output": "stone_pickaxe", "count": 1, "inputs": [{"item": "cobblestone", "count": 3}, {"item": "stick", "count": 2}], "station": "crafting_table"},
    {"output": "stone_sword", "count": 1, "inputs": [{"item": "cobblestone", "count": 2}, {"item": "stick", "count": 1}], "station": "crafting_table"},
    {"output": "stone_axe", "count": 1, "inputs": [{"item": "cobblestone", "count": 3}, {"item": "stick", "count": 2}], "station": "crafting_table"},
    {"output": "furnace", "count": 1, "inputs": [{"item": "cobblestone", "count": 8}], "station": "crafting_table"},
    {"output": "torch", "count": 4, "inputs": [{"item": "coal", "count": 1}, {"item": "stick", "count": 1}]},
    {"output": "iron_ingot", "count": 1, "inputs": [{"item": "iron_ore", "count": 1}, {"item": "coal", "count": 1}], "station": "furnace"}
  ],
  "mining": [
    {"resource": "log", "tier": 0, "depth_min": 0, "depth_max": 0},
    {"resource": "stone", "drop": "cobblestone", "tier": 1, "depth_min": 2, "depth_max": 12},
    {"resource": "coal", "tier": 1, "depth_min": 3, "depth_max": 12},
    {"resource": "iron_ore", "tier": 2, "depth_min": 6, "depth_max": 12}
  ]
}
)json";

}  // namespace

std::shared_ptr<const RuleSet> RuleSet::defaults() {
    static const auto rules = std::make_shared<const RuleSet>(from_json(nlohmann::json::parse(kDefaultTechTree)));
    return rules;
}

}  // namespace ahce::craftworld
