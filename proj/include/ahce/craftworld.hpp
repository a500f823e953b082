#pragma once

// Deterministic crafting-world simulator: tech-tree rules, a 2D column grid
// with an integer depth axis, and the primitive action transition function.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ahce::craftworld {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Raised for malformed requests (unknown item names or ids), never for
// in-world failures, which are reported through Outcome.
class DomainError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ItemId {
    std::uint16_t index = 0;
    auto operator<=>(const ItemId&) const = default;
};

struct ItemCount {
    ItemId item;
    int count = 1;
    bool operator==(const ItemCount&) const = default;
};

struct Recipe {
    ItemId output;
    int count = 1;
    std::vector<ItemCount> inputs;
    std::optional<ItemId> station;
    bool operator==(const Recipe&) const = default;
};

// Tool tiers are ordinal: hand=0 < wooden=1 < stone=2 < iron=3.
inline constexpr int kHandTier = 0;

struct MiningRule {
    ItemId resource;
    ItemId drop;
    int required_tier = kHandTier;
    int depth_min = 0;
    int depth_max = 0;
    bool operator==(const MiningRule&) const = default;

    bool in_band(int depth) const { return depth >= depth_min && depth <= depth_max; }
    bool is_surface() const { return depth_max == 0; }
};

enum class Strategy : std::uint8_t {
    surface_search,
    dig_down,
    leave_biome,
};

std::string_view to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

// Ground-truth strategic knowledge about where a resource is found.
struct Heuristic {
    ItemId resource;
    Strategy strategy = Strategy::surface_search;
    bool operator==(const Heuristic&) const = default;
};

class Inventory {
  public:
    Inventory() = default;
    explicit Inventory(std::size_t item_count) : counts_(item_count, 0) {}

    int count(ItemId id) const { return id.index < counts_.size() ? counts_[id.index] : 0; }
    bool has(ItemId id, int n = 1) const { return count(id) >= n; }
    void add(ItemId id, int n = 1);
    // Returns false and leaves the inventory untouched if fewer than n are held.
    bool remove(ItemId id, int n = 1);
    std::size_t size() const { return counts_.size(); }
    bool empty() const;
    std::span<const int> counts() const { return counts_; }

    bool operator==(const Inventory&) const = default;

  private:
    std::vector<int> counts_;
};

// The full tech tree: items, recipes, mining rules and tool tiers. Loaded from
// JSON so tests can inject variants.
class RuleSet {
  public:
    static RuleSet from_json(const nlohmann::json& doc);
    static RuleSet from_file(const std::filesystem::path& path);
    // Built-in desk-scale tree (20 items); identical to data/techtree.json.
    static std::shared_ptr<const RuleSet> defaults();

    nlohmann::json to_json() const;

    std::size_t item_count() const { return names_.size(); }
    ItemId id(std::string_view name) const;
    std::optional<ItemId> find(std::string_view name) const;
    const std::string& name(ItemId id) const;
    void check(ItemId id) const;

    int tool_tier(ItemId id) const;
    // Highest tool tier available from the given inventory.
    int best_tier(const Inventory& inv) const;
    std::vector<ItemId> tools_with_tier_at_least(int tier) const;

    std::span<const Recipe> recipes() const { return recipes_; }
    std::span<const MiningRule> mining() const { return mining_; }
    std::vector<const Recipe*> recipes_for(ItemId output) const;
    std::vector<const MiningRule*> mining_for_drop(ItemId drop) const;
    const MiningRule* mining_for_resource(ItemId resource) const;
    bool is_resource(ItemId id) const { return mining_for_resource(id) != nullptr; }

    // Ground-truth heuristics: underground resources are found by digging
    // down, surface resources require leaving barren biomes.
    std::vector<Heuristic> heuristics() const;

    bool operator==(const RuleSet&) const = default;

  private:
    void validate() const;

    std::vector<std::string> names_;
    std::vector<int> tiers_;
    std::vector<Recipe> recipes_;
    std::vector<MiningRule> mining_;
};

enum class Biome : std::uint8_t { forest, plains, desert };

std::string_view to_string(Biome b);

struct BiomeMix {
    double forest = 0.4;
    double plains = 0.3;
    double desert = 0.3;
};

struct OreSpec {
    std::string resource;
    double density = 0.1;
    int units = 2;
};

struct WorldConfig {
    int width = 40;
    int height = 40;
    // Biomes are assigned per square chunk; a desert chunk's east neighbour is
    // never desert unless the mix is pure desert.
    int chunk_size = 10;
    BiomeMix mix;
    double tree_density_forest = 0.30;
    double tree_density_plains = 0.06;
    int logs_per_tree = 4;
    int max_depth = 12;
    std::string surface_resource = "log";
    std::string filler_resource = "stone";
    int filler_units = 64;
    std::vector<OreSpec> ores = {{"coal", 0.12, 2}, {"iron_ore", 0.10, 2}};
    std::optional<Biome> spawn_biome;
    // Spawn only at chunk centres, as far from other biomes as possible.
    bool spawn_centered = false;

    void validate() const;
    static WorldConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct Position {
    int x = 0;
    int y = 0;
    auto operator<=>(const Position&) const = default;
};

struct Cell {
    std::int16_t resource = -1;
    std::int16_t units = 0;
    bool operator==(const Cell&) const = default;
};

// Immutable generated terrain shared between copies of a WorldState.
struct Terrain {
    int width = 0;
    int height = 0;
    int max_depth = 0;
    std::vector<Biome> biomes;  // width * height
    std::vector<Cell> cells;    // width * height * (max_depth + 1)

    std::size_t column_index(Position p) const { return static_cast<std::size_t>(p.y) * width + p.x; }
    std::size_t cell_index(Position p, int depth) const {
        return column_index(p) * static_cast<std::size_t>(max_depth + 1) + depth;
    }
    bool operator==(const Terrain&) const = default;
};

struct WorldState {
    std::shared_ptr<const Terrain> terrain;
    std::map<std::size_t, int> depleted;               // cell index -> units removed
    std::map<std::size_t, std::vector<ItemId>> placed;  // cell index -> placed stations
    Position agent_pos;
    int agent_depth = 0;
    Inventory inventory;
    std::uint64_t step_count = 0;
    std::uint64_t rng_seed = 0;

    Biome biome_at(Position p) const { return terrain->biomes[terrain->column_index(p)]; }
    Biome current_biome() const { return biome_at(agent_pos); }
    // Resource and remaining units at a cell after depletion.
    std::optional<ItemId> resource_at(Position p, int depth) const;
    int units_at(Position p, int depth) const;
    bool station_present(ItemId station) const;
    Position wrap(Position p) const;

    bool operator==(const WorldState& other) const;
};

struct Move {
    int dx = 0;
    int dy = 0;
    bool operator==(const Move&) const = default;
};
struct DigDown {
    bool operator==(const DigDown&) const = default;
};
struct ClimbUp {
    bool operator==(const ClimbUp&) const = default;
};
struct Mine {
    ItemId resource;
    bool operator==(const Mine&) const = default;
};
struct Craft {
    ItemId item;
    bool operator==(const Craft&) const = default;
};
struct Place {
    ItemId item;
    bool operator==(const Place&) const = default;
};
struct Noop {
    bool operator==(const Noop&) const = default;
};

using Action = std::variant<Move, DigDown, ClimbUp, Mine, Craft, Place, Noop>;

std::string describe(const Action& a, const RuleSet& rules);

enum class Reason : std::uint8_t {
    none,
    tool_tier_insufficient,
    resource_absent,
    missing_station,
    missing_inputs,
    not_craftable,
    blocked,
};

std::string_view to_string(Reason r);
std::optional<Reason> reason_from_string(std::string_view s);

struct Outcome {
    bool success = true;
    Reason reason = Reason::none;
    std::optional<ItemId> item;

    static Outcome ok() { return {}; }
    static Outcome fail(Reason r, std::optional<ItemId> item = std::nullopt) { return {false, r, item}; }
    bool operator==(const Outcome&) const = default;
};

struct StepResult {
    WorldState state;
    Outcome outcome;
};

WorldState spawn_world(std::uint64_t seed, const WorldConfig& config, const RuleSet& rules);

// Pure transition: returns the successor state and the action's outcome.
StepResult step(const WorldState& state, const Action& action, const RuleSet& rules);

// In-place variant of step used by the episode loop.
Outcome apply_action(WorldState& state, const Action& action, const RuleSet& rules);

// One unit of planned work: bring the inventory count of `item` up to
// `target_count`, either by mining `source` or by crafting.
enum class SubTaskKind : std::uint8_t { gather, craft };

struct SubTask {
    SubTaskKind kind = SubTaskKind::craft;
    ItemId item;
    int target_count = 1;
    std::optional<ItemId> source;  // mined resource for gather sub-tasks
    std::optional<ItemId> tool;    // tool the plan expects to use (gather)
    std::optional<std::size_t> recipe;  // index into RuleSet::recipes()
    Strategy strategy = Strategy::surface_search;
    int search_attempt = 0;
    int step_budget = 200;

    bool operator==(const SubTask&) const = default;
};

std::string describe(const SubTask& t, const RuleSet& rules);

// Minimum-length feasible sub-task sequence for the target under the full rule
// set. Throws InfeasibleError when the target cannot be produced.
std::vector<SubTask> shortest_plan(ItemId target, const WorldState& state, const RuleSet& rules,
                                   int step_budget = 200);
std::vector<SubTask> shortest_plan(ItemId target, const Inventory& inventory, const RuleSet& rules,
                                   int step_budget = 200);

enum class TaskLevel : std::uint8_t { easy, normal, hard };

std::string_view to_string(TaskLevel l);
std::optional<TaskLevel> level_for_plan_length(std::size_t length);

// Canonical sub-task ordering shared by every planner: Kahn's algorithm over
// the prerequisite edges, preferring surface gathers, then crafts, then
// underground gathers, then data-file order.
struct PlanNode {
    SubTask task;
    std::vector<ItemId> prerequisites;
};
std::vector<SubTask> canonical_order(std::vector<PlanNode> nodes, const RuleSet& rules);

// Portable seeded randomness (std distributions are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double uniform();
    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace ahce::craftworld
