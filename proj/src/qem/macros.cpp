#include "ahce/qem.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace ahce::qem {

namespace {

using nlohmann::json;
using craftworld::DigDown;
using craftworld::Move;
using craftworld::Noop;

// Mirrors data/macros.json.
constexpr const char* kDefaultMacros = R"json(
{
  "max_steps": 50,
  "escape_biome": {
    "triggers": ["get out of the desert", "leave the desert"],
    "step": [1, 0],
    "distance": 12,
    "until": "biome_changed"
  },
  "descend_to_depth": {
    "triggers": ["dig down"],
    "until": "resource_here"
  },
  "sweep_search": {
    "triggers": ["search a wider area"],
    "radius": 3,
    "until": "resource_here"
  }
}
)json";

std::vector<std::string> read_triggers(const json& section) {
    std::vector<std::string> out;
    for (const auto& t : section.at("triggers")) out.push_back(t.get<std::string>());
    if (out.empty()) throw craftworld::ConfigError("macro needs at least one trigger phrase");
    return out;
}

}  // namespace

std::string_view to_string(MacroKind k) {
    switch (k) {
        case MacroKind::escape_biome: return "escape_biome";
        case MacroKind::descend_to_depth: return "descend_to_depth";
        case MacroKind::sweep_search: return "sweep_search";
    }
    return "escape_biome";
}

std::string MacroAction::name() const {
    if (kind == MacroKind::escape_biome) return std::string(to_string(kind));
    return std::string(to_string(kind)) + "(" + std::to_string(param) + ")";
}

MacroLibrary MacroLibrary::from_json(const json& doc) {
    MacroLibrary lib;
    try {
        lib.max_steps_ = doc.value("max_steps", 50);
        const auto& esc = doc.at("escape_biome");
        lib.escape_triggers_ = read_triggers(esc);
        const auto step = esc.value("step", std::vector<int>{1, 0});
        if (step != std::vector<int>{1, 0}) throw craftworld::ConfigError("escape_biome steps east in unit moves");
        lib.escape_distance_ = esc.value("distance", 12);
        lib.descend_triggers_ = read_triggers(doc.at("descend_to_depth"));
        const auto& sweep = doc.at("sweep_search");
        lib.sweep_triggers_ = read_triggers(sweep);
        lib.default_sweep_radius_ = sweep.value("radius", 3);
    } catch (const json::exception& e) {
        throw craftworld::ConfigError(std::string("macro library: ") + e.what());
    }
    if (lib.max_steps_ < 1 || lib.escape_distance_ < 1 || lib.escape_distance_ > lib.max_steps_ ||
        lib.default_sweep_radius_ < 1)
        throw craftworld::ConfigError("macro library bounds out of range");
    return lib;
}

MacroLibrary MacroLibrary::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw craftworld::ConfigError("cannot open macro library: " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw craftworld::ConfigError("macro library " + path.string() + ": " + e.what());
    }
}

const MacroLibrary& MacroLibrary::defaults() {
    static const MacroLibrary lib = from_json(json::parse(kDefaultMacros));
    return lib;
}

json MacroLibrary::to_json() const {
    return {{"max_steps", max_steps_},
            {"escape_biome",
             {{"triggers", escape_triggers_}, {"step", {1, 0}}, {"distance", escape_distance_}, {"until", "biome_changed"}}},
            {"descend_to_depth", {{"triggers", descend_triggers_}, {"until", "resource_here"}}},
            {"sweep_search", {{"triggers", sweep_triggers_}, {"radius", default_sweep_radius_}, {"until", "resource_here"}}}};
}

const std::vector<std::string>& MacroLibrary::triggers(MacroKind k) const {
    switch (k) {
        case MacroKind::escape_biome: return escape_triggers_;
        case MacroKind::descend_to_depth: return descend_triggers_;
        case MacroKind::sweep_search: return sweep_triggers_;
    }
    return escape_triggers_;
}

MacroAction MacroLibrary::escape_biome() const {
    MacroAction m;
    m.kind = MacroKind::escape_biome;
    m.param = escape_distance_;
    m.until = Until::biome_changed;
    m.expansion.assign(static_cast<std::size_t>(escape_distance_), Move{1, 0});
    return m;
}

MacroAction MacroLibrary::descend_to_depth(int depth, std::optional<ItemId> resource) const {
    MacroAction m;
    m.kind = MacroKind::descend_to_depth;
    m.param = std::clamp(depth, 0, max_steps_);
    m.resource = resource;
    m.until = resource ? Until::resource_here : Until::never;
    m.expansion.assign(static_cast<std::size_t>(m.param), DigDown{});
    return m;
}

MacroAction MacroLibrary::sweep_search(int radius, std::optional<ItemId> resource) const {
    MacroAction m;
    m.kind = MacroKind::sweep_search;
    m.param = radius > 0 ? radius : default_sweep_radius_;
    m.resource = resource;
    m.until = resource ? Until::resource_here : Until::never;
    // Square spiral outwards: legs of 1, 1, 2, 2, 3, 3, ...
    const Move dirs[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const auto limit = static_cast<std::size_t>(std::min((2 * m.param + 1) * (2 * m.param + 1) - 1, max_steps_));
    for (int leg = 0; m.expansion.size() < limit; ++leg) {
        const int len = leg / 2 + 1;
        for (int i = 0; i < len && m.expansion.size() < limit; ++i) m.expansion.push_back(dirs[leg % 4]);
    }
    return m;
}

bool uses_only_primitives(const MacroAction& m, int max_steps) {
    if (static_cast<int>(m.expansion.size()) > max_steps) return false;
    for (const auto& a : m.expansion) {
        if (const auto* mv = std::get_if<Move>(&a)) {
            if (std::abs(mv->dx) + std::abs(mv->dy) != 1) return false;
        } else if (!std::holds_alternative<DigDown>(a) && !std::holds_alternative<Noop>(a)) {
            return false;
        }
    }
    return true;
}

bool until_met(const MacroAction& m, const craftworld::WorldState& start, const craftworld::WorldState& now) {
    switch (m.until) {
        case Until::never: return false;
        case Until::biome_changed: return now.current_biome() != start.current_biome();
        case Until::resource_here:
            return m.resource && now.resource_at(now.agent_pos, now.agent_depth) == *m.resource;
    }
    return false;
}

}  // namespace ahce::qem
