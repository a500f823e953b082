#include "ahce/qem.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace ahce::qem {

namespace {

using planner::ContextInjection;
using planner::HeuristicRule;
using planner::PrerequisiteRule;
using planner::ToolRule;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_clauses(const std::string& text) {
    std::string s = " " + lower(text) + " ";
    for (const char* joiner : {" then ", " and "}) {
        for (auto pos = s.find(joiner); pos != std::string::npos; pos = s.find(joiner, pos + 1)) {
            s.replace(pos, std::string(joiner).size(), " ; ");
        }
    }
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == '.' || c == ',' || c == ';' || c == '!' || c == '\n') {
            if (auto t = trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (auto t = trim(cur); !t.empty()) out.push_back(t);
    for (auto& c : out) {
        for (const std::string lead : {"first ", "then ", "finally ", "next ", "please ", "you should "}) {
            if (c.rfind(lead, 0) == 0) c = trim(c.substr(lead.size()));
        }
    }
    return out;
}

std::optional<ItemId> item_named(std::string phrase, const RuleSet& rules) {
    phrase = trim(phrase);
    for (const std::string article : {"a ", "an ", "the ", "some "}) {
        if (phrase.rfind(article, 0) == 0) phrase = trim(phrase.substr(article.size()));
    }
    std::replace(phrase.begin(), phrase.end(), ' ', '_');
    if (auto id = rules.find(phrase)) return id;
    // Tolerate a plural "s".
    if (phrase.size() > 1 && phrase.back() == 's') return rules.find(phrase.substr(0, phrase.size() - 1));
    return std::nullopt;
}

// Mined resource for an item name that may refer to the resource or its drop.
std::optional<ItemId> resource_named(const std::string& phrase, const RuleSet& rules) {
    auto id = item_named(phrase, rules);
    if (!id) return std::nullopt;
    if (rules.is_resource(*id)) return id;
    const auto drops = rules.mining_for_drop(*id);
    if (!drops.empty()) return drops.front()->resource;
    return std::nullopt;
}

std::optional<ToolRule> tool_rule(const std::string& tool_phrase, const std::string& resource_phrase,
                                  const RuleSet& rules) {
    const auto tool = item_named(tool_phrase, rules);
    const auto resource = resource_named(resource_phrase, rules);
    if (!tool || !resource || rules.tool_tier(*tool) <= craftworld::kHandTier) return std::nullopt;
    return ToolRule{*resource, rules.tool_tier(*tool)};
}

// Matches "<trigger>[ (to find|for) R]" for any of the trigger phrases.
std::optional<std::optional<std::string>> match_trigger(const std::string& clause,
                                                        const std::vector<std::string>& triggers) {
    for (const auto& t : triggers) {
        if (clause.rfind(t, 0) != 0) continue;
        const auto rest = trim(clause.substr(t.size()));
        if (rest.empty()) return std::optional<std::string>{};
        for (const std::string link : {"to find ", "for ", "to get "}) {
            if (rest.rfind(link, 0) == 0) return std::optional<std::string>{trim(rest.substr(link.size()))};
        }
    }
    return std::nullopt;
}

struct ClauseResult {
    std::vector<planner::Rule> rules;
    std::vector<MacroAction> macros;
};

std::optional<ClauseResult> parse_clause(const std::string& clause, const RuleSet& rules, const MacroLibrary& lib) {
    static const std::regex use_tool(R"(^use (?:a |an |the )?([a-z_ ]+?) (?:for|to mine|on) ([a-z_ ]+)$)");
    static const std::regex only_with(R"(^([a-z_ ]+?) can only be mined with (?:a |an |the )?([a-z_ ]+)$)");
    static const std::regex need_tool(R"(^you need (?:a |an |the )?([a-z_ ]+?) to mine ([a-z_ ]+)$)");
    static const std::regex craft(R"(^(?:craft|make|build) ([a-z_ ]+)$)");

    std::smatch m;
    if (std::regex_match(clause, m, use_tool) || std::regex_match(clause, m, need_tool)) {
        if (auto r = tool_rule(m[1], m[2], rules)) return ClauseResult{{*r}, {}};
        return std::nullopt;
    }
    if (std::regex_match(clause, m, only_with)) {
        if (auto r = tool_rule(m[2], m[1], rules)) return ClauseResult{{*r}, {}};
        return std::nullopt;
    }
    if (std::regex_match(clause, m, craft)) {
        if (auto item = item_named(m[1], rules); item && !rules.recipes_for(*item).empty())
            return ClauseResult{{PrerequisiteRule{*item}}, {}};
        return std::nullopt;
    }
    if (auto t = match_trigger(clause, lib.triggers(MacroKind::descend_to_depth))) {
        if (!*t) return std::nullopt;
        const auto resource = resource_named(**t, rules);
        if (!resource) return std::nullopt;
        const auto* rule = rules.mining_for_resource(*resource);
        return ClauseResult{{HeuristicRule{*resource, craftworld::Strategy::dig_down}},
                            {lib.descend_to_depth(rule->depth_max, resource)}};
    }
    if (auto t = match_trigger(clause, lib.triggers(MacroKind::escape_biome))) {
        ClauseResult out{{}, {lib.escape_biome()}};
        if (*t) {
            const auto resource = resource_named(**t, rules);
            if (!resource) return std::nullopt;
            out.rules.push_back(HeuristicRule{*resource, craftworld::Strategy::leave_biome});
        }
        return out;
    }
    if (auto t = match_trigger(clause, lib.triggers(MacroKind::sweep_search))) {
        std::optional<ItemId> resource;
        if (*t) {
            resource = resource_named(**t, rules);
            if (!resource) return std::nullopt;
        }
        return ClauseResult{{}, {lib.sweep_search(0, resource)}};
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(GuidanceSource s) {
    return s == GuidanceSource::hfm_synthesized ? "hfm_synthesized" : "raw_log_reply";
}

int RoutingDecision::rule_count() const {
    int n = 0;
    for (const auto& inj : injections) {
        for (const auto& r : inj.parsed_rules) n += std::holds_alternative<planner::HeuristicRule>(r) ? 0 : 1;
    }
    return n;
}

int RoutingDecision::heuristic_count() const {
    int n = 0;
    for (const auto& inj : injections) {
        for (const auto& r : inj.parsed_rules) n += std::holds_alternative<planner::HeuristicRule>(r) ? 1 : 0;
    }
    return n;
}

RoutingDecision route(const Guidance& guidance, const RuleSet& rules, const MacroLibrary& macros) {
    if (trim(guidance.text).empty()) throw RoutingError("empty guidance");
    RoutingDecision decision;
    std::vector<std::string> unmatched;
    for (const auto& clause : split_clauses(guidance.text)) {
        auto parsed = parse_clause(clause, rules, macros);
        if (!parsed) {
            unmatched.push_back(clause);
            continue;
        }
        if (!parsed->rules.empty()) decision.injections.push_back(ContextInjection{clause, parsed->rules, false, {}});
        for (auto& m : parsed->macros) decision.macros.push_back(std::move(m));
    }
    for (std::size_t i = 0; i < unmatched.size(); ++i) {
        if (i) decision.unparsed_remainder += "; ";
        decision.unparsed_remainder += unmatched[i];
    }
    if (guidance.source == GuidanceSource::raw_log_reply) {
        if (!decision.unparsed_remainder.empty())
            decision.injections.push_back(ContextInjection{decision.unparsed_remainder, {}, true, {}});
    } else if (decision.empty()) {
        throw RoutingError("no actionable content in guidance: " + guidance.text);
    }
    return decision;
}

void apply(const RoutingDecision& decision, std::vector<planner::ContextInjection>& planner_state,
           std::deque<MacroAction>& performer_queue) {
    planner_state.insert(planner_state.end(), decision.injections.begin(), decision.injections.end());
    performer_queue.insert(performer_queue.begin(), decision.macros.begin(), decision.macros.end());
}

}  // namespace ahce::qem
