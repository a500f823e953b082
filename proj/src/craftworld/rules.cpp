#include "ahce/craftworld.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace ahce::craftworld {

namespace {

using nlohmann::json;

int read_count(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

}  // namespace

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::surface_search: return "surface_search";
        case Strategy::dig_down: return "dig_down";
        case Strategy::leave_biome: return "leave_biome";
    }
    return "surface_search";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
    if (s == "surface_search") return Strategy::surface_search;
    if (s == "dig_down") return Strategy::dig_down;
    if (s == "leave_biome") return Strategy::leave_biome;
    return std::nullopt;
}

std::string_view to_string(Biome b) {
    switch (b) {
        case Biome::forest: return "forest";
        case Biome::plains: return "plains";
        case Biome::desert: return "desert";
    }
    return "forest";
}

std::string_view to_string(Reason r) {
    switch (r) {
        case Reason::none: return "none";
        case Reason::tool_tier_insufficient: return "tool_tier_insufficient";
        case Reason::resource_absent: return "resource_absent";
        case Reason::missing_station: return "missing_station";
        case Reason::missing_inputs: return "missing_inputs";
        case Reason::not_craftable: return "not_craftable";
        case Reason::blocked: return "blocked";
    }
    return "none";
}

std::optional<Reason> reason_from_string(std::string_view s) {
    for (auto r : {Reason::none, Reason::tool_tier_insufficient, Reason::resource_absent, Reason::missing_station,
                   Reason::missing_inputs, Reason::not_craftable, Reason::blocked}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::string_view to_string(TaskLevel l) {
    switch (l) {
        case TaskLevel::easy: return "Easy";
        case TaskLevel::normal: return "Normal";
        case TaskLevel::hard: return "Hard";
    }
    return "Easy";
}

std::optional<TaskLevel> level_for_plan_length(std::size_t length) {
    if (length >= 1 && length <= 3) return TaskLevel::easy;
    if (length >= 4 && length <= 5) return TaskLevel::normal;
    if (length >= 6 && length <= 9) return TaskLevel::hard;
    return std::nullopt;
}

void Inventory::add(ItemId id, int n) {
    if (id.index >= counts_.size()) throw DomainError("inventory: item id out of range");
    counts_[id.index] += n;
}

bool Inventory::remove(ItemId id, int n) {
    if (id.index >= counts_.size() || counts_[id.index] < n) return false;
    counts_[id.index] -= n;
    return true;
}

bool Inventory::empty() const {
    return std::all_of(counts_.begin(), counts_.end(), [](int c) { return c == 0; });
}

RuleSet RuleSet::from_json(const json& doc) {
    RuleSet rs;
    if (!doc.is_object()) throw ConfigError("rule file must be a JSON object");
    if (!doc.contains("items") || !doc.at("items").is_array()) throw ConfigError("rule file needs an 'items' array");

    for (const auto& entry : doc.at("items")) {
        std::string name;
        int tier = 0;
        if (entry.is_string()) {
            name = entry.get<std::string>();
        } else if (entry.is_object()) {
            name = entry.at("name").get<std::string>();
            tier = read_count(entry, "tool_tier", 0);
        } else {
            throw ConfigError("item entries must be strings or objects");
        }
        if (name.empty()) throw ConfigError("empty item name");
        if (rs.find(name)) throw ConfigError("duplicate item: " + name);
        if (tier < 0) throw ConfigError("negative tool tier for " + name);
        rs.names_.push_back(std::move(name));
        rs.tiers_.push_back(tier);
    }

    auto lookup = [&rs](const json& j) {
        auto n = j.get<std::string>();
        auto id = rs.find(n);
        if (!id) throw ConfigError("unknown item in rules: " + n);
        return *id;
    };

    for (const auto& r : doc.value("recipes", json::array())) {
        Recipe recipe;
        recipe.output = lookup(r.at("output"));
        recipe.count = read_count(r, "count", 1);
        for (const auto& in : r.at("inputs")) {
            recipe.inputs.push_back({lookup(in.at("item")), read_count(in, "count", 1)});
        }
        if (r.contains("station") && !r.at("station").is_null()) recipe.station = lookup(r.at("station"));
        rs.recipes_.push_back(std::move(recipe));
    }

    for (const auto& m : doc.value("mining", json::array())) {
        MiningRule rule;
        rule.resource = lookup(m.at("resource"));
        rule.drop = m.contains("drop") ? lookup(m.at("drop")) : rule.resource;
        rule.required_tier = read_count(m, "tier", 0);
        rule.depth_min = read_count(m, "depth_min", 0);
        rule.depth_max = read_count(m, "depth_max", rule.depth_min);
        rs.mining_.push_back(rule);
    }

    rs.validate();
    return rs;
}

RuleSet RuleSet::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open rule file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("rule file " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

json RuleSet::to_json() const {
    json items = json::array();
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (tiers_[i] > 0) {
            items.push_back({{"name", names_[i]}, {"tool_tier", tiers_[i]}});
        } else {
            items.push_back(names_[i]);
        }
    }
    json recipes = json::array();
    for (const auto& r : recipes_) {
        json inputs = json::array();
        for (const auto& in : r.inputs) inputs.push_back({{"item", name(in.item)}, {"count", in.count}});
        json jr = {{"output", name(r.output)}, {"count", r.count}, {"inputs", inputs}};
        if (r.station) jr["station"] = name(*r.station);
        recipes.push_back(std::move(jr));
    }
    json mining = json::array();
    for (const auto& m : mining_) {
        json jm = {{"resource", name(m.resource)},
                   {"tier", m.required_tier},
                   {"depth_min", m.depth_min},
                   {"depth_max", m.depth_max}};
        if (m.drop != m.resource) jm["drop"] = name(m.drop);
        mining.push_back(std::move(jm));
    }
    return {{"items", items}, {"recipes", recipes}, {"mining", mining}};
}

void RuleSet::validate() const {
    const auto n = names_.size();
    std::vector<bool> referenced(n, false);

    for (const auto& r : recipes_) {
        if (r.count < 1) throw ConfigError("recipe for " + name(r.output) + " has count < 1");
        if (r.inputs.empty()) throw ConfigError("recipe for " + name(r.output) + " has no inputs");
        referenced[r.output.index] = true;
        for (const auto& in : r.inputs) {
            if (in.count < 1) throw ConfigError("recipe for " + name(r.output) + " has an input count < 1");
            if (in.item == r.output) throw ConfigError("recipe for " + name(r.output) + " consumes its own output");
            referenced[in.item.index] = true;
        }
        if (r.station) {
            if (*r.station == r.output) throw ConfigError("recipe for " + name(r.output) + " needs itself as station");
            referenced[r.station->index] = true;
        }
    }

    std::vector<bool> mined(n, false);
    for (const auto& m : mining_) {
        if (m.required_tier < 0) throw ConfigError("negative mining tier for " + name(m.resource));
        if (m.depth_min < 0 || m.depth_min > m.depth_max)
            throw ConfigError("invalid depth band for " + name(m.resource));
        if (mined[m.resource.index]) throw ConfigError("duplicate mining rule for " + name(m.resource));
        mined[m.resource.index] = true;
        referenced[m.resource.index] = true;
        referenced[m.drop.index] = true;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!referenced[i]) throw ConfigError("item '" + names_[i] + "' is neither craftable, used, nor mineable");
    }

    // Recipe graph (output -> inputs and station) must be acyclic.
    std::vector<int> mark(n, 0);
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        if (mark[v] == 2) return;
        if (mark[v] == 1) throw ConfigError("recipe graph has a cycle through '" + names_[v] + "'");
        mark[v] = 1;
        for (const auto& r : recipes_) {
            if (r.output.index != v) continue;
            for (const auto& in : r.inputs) visit(in.item.index);
            if (r.station) visit(r.station->index);
        }
        mark[v] = 2;
    };
    for (std::size_t i = 0; i < n; ++i) visit(i);
}

ItemId RuleSet::id(std::string_view n) const {
    auto found = find(n);
    if (!found) throw DomainError("unknown item: " + std::string(n));
    return *found;
}

std::optional<ItemId> RuleSet::find(std::string_view n) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == n) return ItemId{static_cast<std::uint16_t>(i)};
    }
    return std::nullopt;
}

const std::string& RuleSet::name(ItemId id) const {
    check(id);
    return names_[id.index];
}

void RuleSet::check(ItemId id) const {
    if (id.index >= names_.size()) throw DomainError("unknown item id " + std::to_string(id.index));
}

int RuleSet::tool_tier(ItemId id) const {
    check(id);
    return tiers_[id.index];
}

int RuleSet::best_tier(const Inventory& inv) const {
    int best = kHandTier;
    for (std::size_t i = 0; i < tiers_.size(); ++i) {
        if (tiers_[i] > best && inv.count(ItemId{static_cast<std::uint16_t>(i)}) > 0) best = tiers_[i];
    }
    return best;
}

std::vector<ItemId> RuleSet::tools_with_tier_at_least(int tier) const {
    std::vector<ItemId> out;
    for (std::size_t i = 0; i < tiers_.size(); ++i) {
        if (tiers_[i] > 0 && tiers_[i] >= tier) out.push_back(ItemId{static_cast<std::uint16_t>(i)});
    }
    return out;
}

std::vector<const Recipe*> RuleSet::recipes_for(ItemId output) const {
    std::vector<const Recipe*> out;
    for (const auto& r : recipes_) {
        if (r.output == output) out.push_back(&r);
    }
    return out;
}

std::vector<const MiningRule*> RuleSet::mining_for_drop(ItemId drop) const {
    std::vector<const MiningRule*> out;
    for (const auto& m : mining_) {
        if (m.drop == drop) out.push_back(&m);
    }
    return out;
}

const MiningRule* RuleSet::mining_for_resource(ItemId resource) const {
    for (const auto& m : mining_) {
        if (m.resource == resource) return &m;
    }
    return nullptr;
}

std::vector<Heuristic> RuleSet::heuristics() const {
    std::vector<Heuristic> out;
    for (const auto& m : mining_) {
        out.push_back({m.resource, m.is_surface() ? Strategy::leave_biome : Strategy::dig_down});
    }
    return out;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) return r % n;
    }
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ahce::craftworld
