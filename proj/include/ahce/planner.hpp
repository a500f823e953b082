#pragma once

// Knowledge-gapped task decomposer. Plans are optimal under what the knowledge
// base believes, which can be infeasible in the real world when rules or
// heuristics are withheld.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ahce/craftworld.hpp"

namespace ahce::planner {

using craftworld::Inventory;
using craftworld::ItemId;
using craftworld::RuleSet;
using craftworld::Strategy;
using craftworld::SubTask;

// No plan exists even under the knowledge base.
class PlannerStuck : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Rules expressible through guidance. Later rules shadow earlier ones.
struct ToolRule {
    ItemId resource;
    int tier = 0;
    bool operator==(const ToolRule&) const = default;
};
struct HeuristicRule {
    ItemId resource;
    Strategy strategy = Strategy::surface_search;
    bool operator==(const HeuristicRule&) const = default;
};
struct PrerequisiteRule {
    ItemId item;
    bool operator==(const PrerequisiteRule&) const = default;
};
using Rule = std::variant<ToolRule, HeuristicRule, PrerequisiteRule>;

std::string describe(const Rule& rule, const RuleSet& rules);

struct GapProfile {
    std::string name = "FULL";
    std::set<std::string> withheld;

    static GapProfile full();
    // Tool-gating rules withheld.
    static GapProfile gap_fact(const RuleSet& rules);
    // Dig-down and leave-biome heuristics withheld.
    static GapProfile gap_strat(const RuleSet& rules);
    static GapProfile by_name(std::string_view name, const RuleSet& rules);

    static GapProfile from_json(const nlohmann::json& doc);
    static GapProfile from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    bool operator==(const GapProfile&) const = default;
};

// Identifiers of every rule and heuristic in the ground-truth rule set:
// recipe:<output>[#k], mine:<resource>, tier:<resource>,
// heuristic:<resource>:<strategy>.
std::vector<std::string> all_rule_ids(const RuleSet& rules);
std::string recipe_rule_id(std::size_t recipe_index, const RuleSet& rules);

class KnowledgeBase {
  public:
    KnowledgeBase(std::shared_ptr<const RuleSet> rules, GapProfile profile);
    static KnowledgeBase full(std::shared_ptr<const RuleSet> rules);

    // kb ∪ {rule}
    void add(const Rule& rule);
    KnowledgeBase with(const Rule& rule) const;

    bool knows(const std::string& rule_id) const { return known_.count(rule_id) > 0; }
    bool knows_recipe(std::size_t recipe_index) const;
    bool knows_mining(ItemId resource) const;
    int believed_tier(ItemId resource) const;
    Strategy believed_strategy(ItemId resource) const;
    const std::vector<ItemId>& prerequisites() const { return prerequisites_; }

    const RuleSet& rules() const { return *rules_; }
    const std::shared_ptr<const RuleSet>& rules_ptr() const { return rules_; }
    const GapProfile& gap_profile() const { return profile_; }
    const std::vector<Rule>& added() const { return added_; }

    bool operator==(const KnowledgeBase& other) const;

  private:
    std::shared_ptr<const RuleSet> rules_;
    GapProfile profile_;
    std::set<std::string> known_;
    std::map<ItemId, int> tier_overrides_;
    std::map<ItemId, Strategy> strategy_overrides_;
    std::vector<ItemId> prerequisites_;
    std::vector<Rule> added_;
};

// Guidance injected into the planner's context.
struct ContextInjection {
    std::string text;
    std::vector<Rule> parsed_rules;
    // Free text with no typed content; carried for the record, it does not
    // change plans.
    bool untyped = false;
    // Remaining planning calls; nullopt lasts for the rest of the episode.
    std::optional<int> ttl;

    bool active() const { return !ttl || *ttl > 0; }
    bool operator==(const ContextInjection&) const = default;
};

// Decrements every finite ttl; call once per planning call.
void tick(std::vector<ContextInjection>& injections);

KnowledgeBase effective_knowledge(const KnowledgeBase& kb, const std::vector<ContextInjection>& injections);

struct Provenance {
    std::vector<std::string> rule_ids;
    std::vector<std::string> injections;
    bool operator==(const Provenance&) const = default;
};

struct Plan {
    ItemId target;
    std::vector<SubTask> subtasks;
    Provenance provenance;
    bool operator==(const Plan&) const = default;
};

// Optimal plan under kb plus active injections, starting from `inventory`.
Plan decompose(ItemId target, const KnowledgeBase& kb, const std::vector<ContextInjection>& injections,
               const Inventory& inventory, int step_budget = 200);
Plan decompose(ItemId target, const KnowledgeBase& kb, const std::vector<ContextInjection>& injections = {});

// Revises the remaining plan (failing sub-task first) after a failure using
// only what kb knows: replans missing inputs and stations, otherwise retries
// the sub-task with a wider local search.
Plan self_correct(const Plan& remaining, const craftworld::Outcome& failure, const KnowledgeBase& kb,
                  const Inventory& inventory);

}  // namespace ahce::planner
