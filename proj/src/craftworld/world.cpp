#include "ahce/craftworld.hpp"

#include <algorithm>
#include <cmath>

namespace ahce::craftworld {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Biome sample_biome(Rng& rng, const BiomeMix& mix, bool allow_desert) {
    double forest = mix.forest;
    double plains = mix.plains;
    double desert = allow_desert ? mix.desert : 0.0;
    const double total = forest + plains + desert;
    const double u = rng.uniform() * total;
    if (u < forest) return Biome::forest;
    if (u < forest + plains) return Biome::plains;
    return Biome::desert;
}

std::optional<Biome> biome_from_string(std::string_view s) {
    if (s == "forest") return Biome::forest;
    if (s == "plains") return Biome::plains;
    if (s == "desert") return Biome::desert;
    return std::nullopt;
}

}  // namespace

void WorldConfig::validate() const {
    if (width < 8 || height < 8) throw ConfigError("world grid must be at least 8x8");
    if (chunk_size < 1 || width % chunk_size != 0 || height % chunk_size != 0)
        throw ConfigError("grid dimensions must be multiples of chunk_size");
    if (mix.forest < 0 || mix.plains < 0 || mix.desert < 0) throw ConfigError("biome proportions must be non-negative");
    if (std::abs(mix.forest + mix.plains + mix.desert - 1.0) > 1e-9)
        throw ConfigError("biome proportions must sum to 1");
    if (max_depth < 1) throw ConfigError("max_depth must be positive");
    if (logs_per_tree < 1 || filler_units < 1) throw ConfigError("resource unit counts must be positive");
    for (const auto& ore : ores) {
        if (ore.density < 0 || ore.density > 1 || ore.units < 1) throw ConfigError("invalid ore settings for " + ore.resource);
    }
    if (spawn_biome == Biome::desert && mix.desert == 0) throw ConfigError("spawn biome absent from the mix");
    if (spawn_biome == Biome::forest && mix.forest == 0) throw ConfigError("spawn biome absent from the mix");
    if (spawn_biome == Biome::plains && mix.plains == 0) throw ConfigError("spawn biome absent from the mix");
}

WorldConfig WorldConfig::from_json(const json& doc) {
    WorldConfig c;
    c.width = doc.value("width", c.width);
    c.height = doc.value("height", c.height);
    c.chunk_size = doc.value("chunk_size", c.chunk_size);
    if (doc.contains("mix")) {
        const auto& m = doc.at("mix");
        c.mix.forest = m.value("forest", 0.0);
        c.mix.plains = m.value("plains", 0.0);
        c.mix.desert = m.value("desert", 0.0);
    }
    c.tree_density_forest = doc.value("tree_density_forest", c.tree_density_forest);
    c.tree_density_plains = doc.value("tree_density_plains", c.tree_density_plains);
    c.logs_per_tree = doc.value("logs_per_tree", c.logs_per_tree);
    c.max_depth = doc.value("max_depth", c.max_depth);
    c.surface_resource = doc.value("surface_resource", c.surface_resource);
    c.filler_resource = doc.value("filler_resource", c.filler_resource);
    c.filler_units = doc.value("filler_units", c.filler_units);
    if (doc.contains("ores")) {
        c.ores.clear();
        for (const auto& o : doc.at("ores")) {
            c.ores.push_back({o.at("resource").get<std::string>(), o.value("density", 0.1), o.value("units", 2)});
        }
    }
    if (doc.contains("spawn_biome") && !doc.at("spawn_biome").is_null()) {
        auto b = biome_from_string(doc.at("spawn_biome").get<std::string>());
        if (!b) throw ConfigError("unknown spawn biome");
        c.spawn_biome = *b;
    }
    c.spawn_centered = doc.value("spawn_centered", c.spawn_centered);
    c.validate();
    return c;
}

json WorldConfig::to_json() const {
    json ores_json = json::array();
    for (const auto& o : ores) ores_json.push_back({{"resource", o.resource}, {"density", o.density}, {"units", o.units}});
    json j = {{"width", width},
              {"height", height},
              {"chunk_size", chunk_size},
              {"mix", {{"forest", mix.forest}, {"plains", mix.plains}, {"desert", mix.desert}}},
              {"tree_density_forest", tree_density_forest},
              {"tree_density_plains", tree_density_plains},
              {"logs_per_tree", logs_per_tree},
              {"max_depth", max_depth},
              {"surface_resource", surface_resource},
              {"filler_resource", filler_resource},
              {"filler_units", filler_units},
              {"ores", ores_json}};
    j["spawn_biome"] = spawn_biome ? json(std::string(to_string(*spawn_biome))) : json(nullptr);
    j["spawn_centered"] = spawn_centered;
    return j;
}

std::optional<ItemId> WorldState::resource_at(Position p, int depth) const {
    if (units_at(p, depth) <= 0) return std::nullopt;
    return ItemId{static_cast<std::uint16_t>(terrain->cells[terrain->cell_index(p, depth)].resource)};
}

int WorldState::units_at(Position p, int depth) const {
    if (depth < 0 || depth > terrain->max_depth) return 0;
    const auto idx = terrain->cell_index(p, depth);
    const auto& cell = terrain->cells[idx];
    if (cell.resource < 0) return 0;
    int units = cell.units;
    if (auto it = depleted.find(idx); it != depleted.end()) units -= it->second;
    return std::max(units, 0);
}

bool WorldState::station_present(ItemId station) const {
    if (inventory.has(station)) return true;
    auto it = placed.find(terrain->cell_index(agent_pos, agent_depth));
    return it != placed.end() && std::find(it->second.begin(), it->second.end(), station) != it->second.end();
}

Position WorldState::wrap(Position p) const {
    auto mod = [](int a, int n) { return ((a % n) + n) % n; };
    return {mod(p.x, terrain->width), mod(p.y, terrain->height)};
}

bool WorldState::operator==(const WorldState& other) const {
    const bool same_terrain =
        terrain == other.terrain || (terrain && other.terrain && *terrain == *other.terrain);
    return same_terrain && depleted == other.depleted && placed == other.placed && agent_pos == other.agent_pos &&
           agent_depth == other.agent_depth && inventory == other.inventory && step_count == other.step_count &&
           rng_seed == other.rng_seed;
}

WorldState spawn_world(std::uint64_t seed, const WorldConfig& config, const RuleSet& rules) {
    config.validate();
    const auto surface = rules.id(config.surface_resource);
    const auto filler = rules.id(config.filler_resource);
    const auto* surface_rule = rules.mining_for_resource(surface);
    const auto* filler_rule = rules.mining_for_resource(filler);
    if (!surface_rule || !filler_rule) throw ConfigError("surface and filler resources need mining rules");

    struct OreGen {
        ItemId id;
        const MiningRule* rule;
        double density;
        int units;
    };
    std::vector<OreGen> ores;
    for (const auto& o : config.ores) {
        const auto id = rules.id(o.resource);
        const auto* rule = rules.mining_for_resource(id);
        if (!rule) throw ConfigError("ore without mining rule: " + o.resource);
        ores.push_back({id, rule, o.density, o.units});
    }

    Rng rng(mix_seed(seed, 0x5eedULL));
    auto terrain = std::make_shared<Terrain>();
    terrain->width = config.width;
    terrain->height = config.height;
    terrain->max_depth = config.max_depth;
    terrain->biomes.assign(static_cast<std::size_t>(config.width) * config.height, Biome::plains);
    terrain->cells.assign(terrain->biomes.size() * static_cast<std::size_t>(config.max_depth + 1), Cell{});

    const int chunks_x = config.width / config.chunk_size;
    const int chunks_y = config.height / config.chunk_size;
    const bool constrain = config.mix.desert < 1.0;
    std::vector<Biome> chunk_biome(static_cast<std::size_t>(chunks_x) * chunks_y);
    for (int cy = 0; cy < chunks_y; ++cy) {
        for (int cx = 0; cx < chunks_x; ++cx) {
            const bool west_desert = cx > 0 && chunk_biome[cy * chunks_x + cx - 1] == Biome::desert;
            const bool wraps_to_desert =
                cx == chunks_x - 1 && chunk_biome[cy * chunks_x] == Biome::desert;
            const bool allow_desert = !constrain || !(west_desert || wraps_to_desert || chunks_x == 1);
            chunk_biome[cy * chunks_x + cx] = sample_biome(rng, config.mix, allow_desert);
        }
    }

    for (int y = 0; y < config.height; ++y) {
        for (int x = 0; x < config.width; ++x) {
            const Position p{x, y};
            const auto biome = chunk_biome[(y / config.chunk_size) * chunks_x + x / config.chunk_size];
            terrain->biomes[terrain->column_index(p)] = biome;

            const double density = biome == Biome::forest   ? config.tree_density_forest
                                   : biome == Biome::plains ? config.tree_density_plains
                                                            : 0.0;
            const bool tree = rng.uniform() < density;
            if (tree && surface_rule->in_band(0)) {
                terrain->cells[terrain->cell_index(p, 0)] = {static_cast<std::int16_t>(surface.index),
                                                             static_cast<std::int16_t>(config.logs_per_tree)};
            }
            for (int d = 1; d <= config.max_depth; ++d) {
                Cell cell;
                if (filler_rule->in_band(d)) {
                    cell = {static_cast<std::int16_t>(filler.index), static_cast<std::int16_t>(config.filler_units)};
                }
                for (const auto& ore : ores) {
                    const bool hit = rng.uniform() < ore.density;
                    if (hit && ore.rule->in_band(d)) {
                        cell = {static_cast<std::int16_t>(ore.id.index), static_cast<std::int16_t>(ore.units)};
                    }
                }
                terrain->cells[terrain->cell_index(p, d)] = cell;
            }
        }
    }

    WorldState state;
    state.rng_seed = seed;
    state.inventory = Inventory(rules.item_count());

    std::vector<Position> candidates;
    for (int y = 0; y < config.height; ++y) {
        for (int x = 0; x < config.width; ++x) {
            const Position p{x, y};
            const int half = config.chunk_size / 2;
            if (config.spawn_centered && (x % config.chunk_size != half || y % config.chunk_size != half)) continue;
            if (!config.spawn_biome || terrain->biomes[terrain->column_index(p)] == *config.spawn_biome)
                candidates.push_back(p);
        }
    }
    if (candidates.empty()) {
        for (int y = 0; y < config.height; ++y)
            for (int x = 0; x < config.width; ++x) candidates.push_back({x, y});
    }
    state.agent_pos = candidates[rng.below(candidates.size())];
    state.terrain = std::move(terrain);
    return state;
}

Outcome apply_action(WorldState& state, const Action& action, const RuleSet& rules) {
    // Validate ids before mutating anything: a domain error is not a step.
    std::visit(overloaded{[&](const Mine& m) { rules.check(m.resource); },
                          [&](const Craft& c) { rules.check(c.item); },
                          [&](const Place& p) { rules.check(p.item); },
                          [&](const Move& m) {
                              if (std::abs(m.dx) > 1 || std::abs(m.dy) > 1)
                                  throw DomainError("moves are limited to one column per step");
                          },
                          [](const auto&) {}},
               action);

    ++state.step_count;
    return std::visit(
        overloaded{
            [&](const Move& m) {
                state.agent_pos = state.wrap({state.agent_pos.x + m.dx, state.agent_pos.y + m.dy});
                return Outcome::ok();
            },
            [&](const DigDown&) {
                if (state.agent_depth >= state.terrain->max_depth) return Outcome::fail(Reason::blocked);
                ++state.agent_depth;
                return Outcome::ok();
            },
            [&](const ClimbUp&) {
                if (state.agent_depth == 0) return Outcome::fail(Reason::blocked);
                --state.agent_depth;
                return Outcome::ok();
            },
            [&](const Mine& m) {
                const auto* rule = rules.mining_for_resource(m.resource);
                const auto here = state.resource_at(state.agent_pos, state.agent_depth);
                if (!rule || here != m.resource) return Outcome::fail(Reason::resource_absent, m.resource);
                if (rules.best_tier(state.inventory) < rule->required_tier)
                    return Outcome::fail(Reason::tool_tier_insufficient, m.resource);
                ++state.depleted[state.terrain->cell_index(state.agent_pos, state.agent_depth)];
                state.inventory.add(rule->drop, 1);
                return Outcome::ok();
            },
            [&](const Craft& c) {
                const auto recipes = rules.recipes_for(c.item);
                if (recipes.empty()) return Outcome::fail(Reason::not_craftable, c.item);
                std::optional<Outcome> first_failure;
                for (const auto* r : recipes) {
                    if (r->station && !state.station_present(*r->station)) {
                        if (!first_failure) first_failure = Outcome::fail(Reason::missing_station, *r->station);
                        continue;
                    }
                    const bool inputs_ok = std::all_of(r->inputs.begin(), r->inputs.end(), [&](const ItemCount& in) {
                        return state.inventory.has(in.item, in.count);
                    });
                    if (!inputs_ok) {
                        if (!first_failure) first_failure = Outcome::fail(Reason::missing_inputs, c.item);
                        continue;
                    }
                    for (const auto& in : r->inputs) state.inventory.remove(in.item, in.count);
                    state.inventory.add(r->output, r->count);
                    return Outcome::ok();
                }
                return *first_failure;
            },
            [&](const Place& p) {
                if (!state.inventory.remove(p.item, 1)) return Outcome::fail(Reason::missing_inputs, p.item);
                state.placed[state.terrain->cell_index(state.agent_pos, state.agent_depth)].push_back(p.item);
                return Outcome::ok();
            },
            [&](const Noop&) { return Outcome::ok(); },
        },
        action);
}

StepResult step(const WorldState& state, const Action& action, const RuleSet& rules) {
    StepResult result{state, {}};
    result.outcome = apply_action(result.state, action, rules);
    return result;
}

std::string describe(const Action& a, const RuleSet& rules) {
    return std::visit(overloaded{
                          [](const Move& m) { return "move(" + std::to_string(m.dx) + "," + std::to_string(m.dy) + ")"; },
                          [](const DigDown&) { return std::string("dig_down"); },
                          [](const ClimbUp&) { return std::string("climb_up"); },
                          [&](const Mine& m) { return "mine(" + rules.name(m.resource) + ")"; },
                          [&](const Craft& c) { return "craft(" + rules.name(c.item) + ")"; },
                          [&](const Place& p) { return "place(" + rules.name(p.item) + ")"; },
                          [](const Noop&) { return std::string("noop"); },
                      },
                      a);
}

std::string describe(const SubTask& t, const RuleSet& rules) {
    std::string s = t.kind == SubTaskKind::gather ? "gather " : "craft ";
    s += rules.name(t.item) + " x" + std::to_string(t.target_count);
    if (t.kind == SubTaskKind::gather && t.source) {
        s += " (mine " + rules.name(*t.source) + ", " + std::string(to_string(t.strategy));
        if (t.tool) s += ", with " + rules.name(*t.tool);
        s += ")";
    }
    return s;
}

}  // namespace ahce::craftworld
