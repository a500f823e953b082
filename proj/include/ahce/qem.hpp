#pragma once

// Query execution: turns guidance text into planner context injections and
// bounded escape maneuvers for the performer.

#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ahce/craftworld.hpp"
#include "ahce/planner.hpp"

namespace ahce::qem {

using craftworld::Action;
using craftworld::ItemId;
using craftworld::RuleSet;

class RoutingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class GuidanceSource : std::uint8_t { hfm_synthesized, raw_log_reply };

std::string_view to_string(GuidanceSource s);

struct Guidance {
    std::string text;
    GuidanceSource source = GuidanceSource::hfm_synthesized;
};

enum class MacroKind : std::uint8_t { escape_biome, descend_to_depth, sweep_search };

std::string_view to_string(MacroKind k);

// Early-stop condition checked before each expanded step.
enum class Until : std::uint8_t { never, biome_changed, resource_here };

struct MacroAction {
    MacroKind kind = MacroKind::escape_biome;
    int param = 0;  // depth for descend_to_depth, radius for sweep_search
    std::vector<Action> expansion;
    Until until = Until::never;
    std::optional<ItemId> resource;

    std::string name() const;
    bool operator==(const MacroAction&) const = default;
};

// Macro library: primitive patterns per macro plus trigger phrases.
class MacroLibrary {
  public:
    static MacroLibrary from_json(const nlohmann::json& doc);
    static MacroLibrary from_file(const std::filesystem::path& path);
    static const MacroLibrary& defaults();
    nlohmann::json to_json() const;

    int max_steps() const { return max_steps_; }
    const std::vector<std::string>& triggers(MacroKind k) const;

    MacroAction escape_biome() const;
    MacroAction descend_to_depth(int depth, std::optional<ItemId> resource = std::nullopt) const;
    MacroAction sweep_search(int radius, std::optional<ItemId> resource = std::nullopt) const;

  private:
    int max_steps_ = 50;
    int escape_distance_ = 12;
    int default_sweep_radius_ = 3;
    std::vector<std::string> escape_triggers_;
    std::vector<std::string> descend_triggers_;
    std::vector<std::string> sweep_triggers_;
};

// True when the expansion consists only of unit moves, dig_down and noop and
// stays within the library's step bound.
bool uses_only_primitives(const MacroAction& m, int max_steps);

bool until_met(const MacroAction& m, const craftworld::WorldState& start, const craftworld::WorldState& now);

struct RoutingDecision {
    std::vector<planner::ContextInjection> injections;
    std::vector<MacroAction> macros;
    std::string unparsed_remainder;

    bool empty() const { return injections.empty() && macros.empty(); }
    int rule_count() const;
    int heuristic_count() const;
    bool operator==(const RoutingDecision&) const = default;
};

// Grammar (case-insensitive, clauses split on . , ; "and" "then"):
//   use [a|an|the] TOOL (for|to mine) R
//   R can only be mined with [a|an|the] TOOL
//   you need [a|an|the] TOOL to mine R
//   (craft|make) [a|an|the] ITEM
//   dig down (to find|for) R
//   (get out of|leave) the desert [to find R]
//   search a wider area [for R]
// Item names may use spaces or underscores.
RoutingDecision route(const Guidance& guidance, const RuleSet& rules,
                      const MacroLibrary& macros = MacroLibrary::defaults());

// Appends injections to the planner context and prepends macros, in guidance
// order, to the performer queue.
void apply(const RoutingDecision& decision, std::vector<planner::ContextInjection>& planner_state,
           std::deque<MacroAction>& performer_queue);

}  // namespace ahce::qem
