#include "ahce/planner.hpp"

#include <algorithm>
#include <fstream>

namespace ahce::planner {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string tier_id(ItemId resource, const RuleSet& rules) { return "tier:" + rules.name(resource); }

std::string heuristic_id(ItemId resource, Strategy s, const RuleSet& rules) {
    return "heuristic:" + rules.name(resource) + ":" + std::string(craftworld::to_string(s));
}

}  // namespace

std::string describe(const Rule& rule, const RuleSet& rules) {
    return std::visit(overloaded{
                          [&](const ToolRule& r) {
                              return rules.name(r.resource) + " needs tool tier " + std::to_string(r.tier);
                          },
                          [&](const HeuristicRule& r) {
                              return rules.name(r.resource) + ": " + std::string(craftworld::to_string(r.strategy));
                          },
                          [&](const PrerequisiteRule& r) { return "acquire " + rules.name(r.item); },
                      },
                      rule);
}

std::string recipe_rule_id(std::size_t recipe_index, const RuleSet& rules) {
    const auto recipes = rules.recipes();
    if (recipe_index >= recipes.size()) throw craftworld::DomainError("recipe index out of range");
    const auto output = recipes[recipe_index].output;
    int k = 0;
    for (std::size_t i = 0; i < recipe_index; ++i) {
        if (recipes[i].output == output) ++k;
    }
    std::string id = "recipe:" + rules.name(output);
    if (k > 0) id += "#" + std::to_string(k);
    return id;
}

std::vector<std::string> all_rule_ids(const RuleSet& rules) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < rules.recipes().size(); ++i) ids.push_back(recipe_rule_id(i, rules));
    for (const auto& m : rules.mining()) {
        ids.push_back("mine:" + rules.name(m.resource));
        ids.push_back(tier_id(m.resource, rules));
    }
    for (const auto& h : rules.heuristics()) ids.push_back(heuristic_id(h.resource, h.strategy, rules));
    return ids;
}

GapProfile GapProfile::full() { return {}; }

GapProfile GapProfile::gap_fact(const RuleSet& rules) {
    GapProfile p{"GAP-FACT", {}};
    for (const auto& m : rules.mining()) {
        if (m.required_tier > craftworld::kHandTier) p.withheld.insert(tier_id(m.resource, rules));
    }
    return p;
}

GapProfile GapProfile::gap_strat(const RuleSet& rules) {
    GapProfile p{"GAP-STRAT", {}};
    for (const auto& h : rules.heuristics()) p.withheld.insert(heuristic_id(h.resource, h.strategy, rules));
    return p;
}

GapProfile GapProfile::by_name(std::string_view name, const RuleSet& rules) {
    if (name == "FULL") return full();
    if (name == "GAP-FACT") return gap_fact(rules);
    if (name == "GAP-STRAT") return gap_strat(rules);
    throw craftworld::ConfigError("unknown gap profile: " + std::string(name));
}

GapProfile GapProfile::from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("name") || !doc.contains("withheld"))
        throw craftworld::ConfigError("gap profile needs 'name' and 'withheld'");
    GapProfile p;
    p.name = doc.at("name").get<std::string>();
    for (const auto& id : doc.at("withheld")) p.withheld.insert(id.get<std::string>());
    return p;
}

GapProfile GapProfile::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw craftworld::ConfigError("cannot open gap profile: " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw craftworld::ConfigError("gap profile " + path.string() + ": " + e.what());
    }
}

json GapProfile::to_json() const {
    return {{"name", name}, {"withheld", std::vector<std::string>(withheld.begin(), withheld.end())}};
}

KnowledgeBase::KnowledgeBase(std::shared_ptr<const RuleSet> rules, GapProfile profile)
    : rules_(std::move(rules)), profile_(std::move(profile)) {
    if (!rules_) throw craftworld::ConfigError("knowledge base needs a rule set");
    const auto ids = all_rule_ids(*rules_);
    for (const auto& w : profile_.withheld) {
        if (std::find(ids.begin(), ids.end(), w) == ids.end())
            throw craftworld::ConfigError("gap profile withholds unknown rule: " + w);
    }
    for (const auto& id : ids) {
        if (!profile_.withheld.count(id)) known_.insert(id);
    }
}

KnowledgeBase KnowledgeBase::full(std::shared_ptr<const RuleSet> rules) {
    return KnowledgeBase(std::move(rules), GapProfile::full());
}

void KnowledgeBase::add(const Rule& rule) {
    std::visit(overloaded{
                   [&](const ToolRule& r) {
                       rules_->check(r.resource);
                       tier_overrides_[r.resource] = r.tier;
                   },
                   [&](const HeuristicRule& r) {
                       rules_->check(r.resource);
                       strategy_overrides_[r.resource] = r.strategy;
                   },
                   [&](const PrerequisiteRule& r) {
                       rules_->check(r.item);
                       if (std::find(prerequisites_.begin(), prerequisites_.end(), r.item) == prerequisites_.end())
                           prerequisites_.push_back(r.item);
                   },
               },
               rule);
    added_.push_back(rule);
}

KnowledgeBase KnowledgeBase::with(const Rule& rule) const {
    KnowledgeBase out = *this;
    out.add(rule);
    return out;
}

bool KnowledgeBase::knows_recipe(std::size_t recipe_index) const {
    return knows(recipe_rule_id(recipe_index, *rules_));
}

bool KnowledgeBase::knows_mining(ItemId resource) const { return knows("mine:" + rules_->name(resource)); }

int KnowledgeBase::believed_tier(ItemId resource) const {
    if (auto it = tier_overrides_.find(resource); it != tier_overrides_.end()) return it->second;
    const auto* rule = rules_->mining_for_resource(resource);
    if (rule && knows(tier_id(resource, *rules_))) return rule->required_tier;
    return craftworld::kHandTier;
}

Strategy KnowledgeBase::believed_strategy(ItemId resource) const {
    if (auto it = strategy_overrides_.find(resource); it != strategy_overrides_.end()) return it->second;
    for (const auto& h : rules_->heuristics()) {
        if (h.resource == resource && knows(heuristic_id(resource, h.strategy, *rules_))) return h.strategy;
    }
    return Strategy::surface_search;
}

bool KnowledgeBase::operator==(const KnowledgeBase& other) const {
    const bool same_rules = rules_ == other.rules_ || *rules_ == *other.rules_;
    return same_rules && known_ == other.known_ && tier_overrides_ == other.tier_overrides_ &&
           strategy_overrides_ == other.strategy_overrides_ && prerequisites_ == other.prerequisites_;
}

void tick(std::vector<ContextInjection>& injections) {
    for (auto& inj : injections) {
        if (inj.ttl && *inj.ttl > 0) --*inj.ttl;
    }
}

KnowledgeBase effective_knowledge(const KnowledgeBase& kb, const std::vector<ContextInjection>& injections) {
    KnowledgeBase out = kb;
    for (const auto& inj : injections) {
        if (!inj.active()) continue;
        for (const auto& r : inj.parsed_rules) out.add(r);
    }
    return out;
}

}  // namespace ahce::planner
