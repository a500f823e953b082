#include "ahce/harness.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace ahce::harness {

namespace {

std::string spaced(std::string name) {
    std::replace(name.begin(), name.end(), '_', ' ');
    return name;
}

std::string underscored(std::string name) {
    std::replace(name.begin(), name.end(), ' ', '_');
    return name;
}

std::optional<ItemId> cheapest_tool(const RuleSet& rules, int tier) {
    std::optional<ItemId> best;
    for (auto t : rules.tools_with_tier_at_least(tier)) {
        if (!best || rules.tool_tier(t) < rules.tool_tier(*best)) best = t;
    }
    return best;
}

std::string tool_advice(const RuleSet& rules, ItemId resource, bool noisy) {
    const auto* rule = rules.mining_for_resource(resource);
    const auto name = spaced(rules.name(resource));
    if (!rule || rule->required_tier <= craftworld::kHandTier) return name + " can be mined by hand";
    if (noisy) return name + " can only be mined with a pickaxe";
    return name + " can only be mined with a " + spaced(rules.name(*cheapest_tool(rules, rule->required_tier)));
}

std::string location_advice(const RuleSet& rules, ItemId resource, std::optional<craftworld::Biome> biome, bool noisy) {
    const auto* rule = rules.mining_for_resource(resource);
    const auto name = spaced(rules.name(resource));
    if (noisy) return name + " is around somewhere, keep looking";
    if (!rule) return hfm::kUnknown;
    if (!rule->is_surface()) return "dig down to find " + name;
    if (biome == craftworld::Biome::desert) return "get out of the desert to find " + name;
    return "search a wider area for " + name;
}

std::optional<craftworld::Biome> biome_named(const std::string& s) {
    if (s == "desert") return craftworld::Biome::desert;
    if (s == "forest") return craftworld::Biome::forest;
    if (s == "plains") return craftworld::Biome::plains;
    return std::nullopt;
}

std::optional<ItemId> resource_for(const RuleSet& rules, const std::string& phrase) {
    auto id = rules.find(underscored(phrase));
    if (!id) return std::nullopt;
    if (rules.is_resource(*id)) return id;
    const auto drops = rules.mining_for_drop(*id);
    if (!drops.empty()) return drops.front()->resource;
    return std::nullopt;
}

}  // namespace

ScriptedExpert::ScriptedExpert(std::shared_ptr<const RuleSet> rules, double review_seconds, double log_noise,
                               std::uint64_t seed)
    : rules_(std::move(rules)),
      review_ms_(static_cast<std::int64_t>(review_seconds * 1000.0 + 0.5)),
      log_noise_(log_noise),
      rng_(seed) {}

std::optional<hfm::ExpertResponse> ScriptedExpert::ask(const hfm::Query& query, std::chrono::milliseconds) {
    hfm::ExpertResponse r;
    r.query_id = query.id;
    r.text = query.text.rfind("failure log", 0) == 0 ? reply_to_log(query.text) : answer(query.text);
    r.t_review_start_ms = clock_ms_;
    clock_ms_ += review_ms_;
    r.t_submit_ms = clock_ms_;
    return r;
}

std::string ScriptedExpert::answer(const std::string& question) {
    static const std::regex tool_q(R"(^what tool do i need to mine ([a-z_ ]+)\?$)", std::regex::icase);
    static const std::regex where_q(R"(^where can i find ([a-z_ ]+?)(?: in the ([a-z]+))?\?$)", std::regex::icase);
    static const std::regex get_q(R"(^how do i get ([a-z_ ]+)\?$)", std::regex::icase);
    std::smatch m;
    if (std::regex_match(question, m, tool_q)) {
        if (auto r = resource_for(*rules_, m[1])) return tool_advice(*rules_, *r, false);
    } else if (std::regex_match(question, m, where_q)) {
        if (auto r = resource_for(*rules_, m[1])) return location_advice(*rules_, *r, biome_named(m[2]), false);
    } else if (std::regex_match(question, m, get_q)) {
        if (auto item = rules_->find(underscored(m[1]))) {
            if (!rules_->recipes_for(*item).empty()) return "craft " + spaced(rules_->name(*item));
        }
    }
    return hfm::kUnknown;
}

std::string ScriptedExpert::reply_to_log(const std::string& log) {
    std::map<std::string, std::string> fields;
    std::istringstream in(log);
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(": ");
        if (colon != std::string::npos) fields[line.substr(0, colon)] = line.substr(colon + 2);
    }
    const bool noisy = rng_.uniform() < log_noise_;
    const auto resource = fields.count("resource") ? resource_for(*rules_, fields["resource"]) : std::nullopt;
    if (!resource) return "try crafting it again";
    if (fields["reason"] == "tool_tier_insufficient") return tool_advice(*rules_, *resource, noisy);
    return location_advice(*rules_, *resource, biome_named(fields["biome"]), noisy);
}

std::string ImpasseTask::prompt() const {
    std::ostringstream out;
    out << "task: " << impasse_.task_id << "; failing sub-task: " << craftworld::describe(impasse_.subtask, rules_)
        << "; consecutive failures: " << impasse_.n_fail << "; last failure: "
        << craftworld::to_string(impasse_.failure.reason);
    if (impasse_.failure.item) out << "(" << rules_.name(*impasse_.failure.item) << ")";
    out << "; inventory: " << (impasse_.inventory.empty() ? "empty" : impasse_.inventory)
        << "; biome: " << craftworld::to_string(impasse_.biome);
    return out.str();
}

hfm::Belief ImpasseTask::initial_belief() const {
    hfm::Belief b;
    b.slots = 1;
    return b;
}

std::string ImpasseTask::query_for(const hfm::Belief&) const {
    const auto& t = impasse_.subtask;
    if (t.kind == craftworld::SubTaskKind::gather && t.source) {
        const auto name = spaced(rules_.name(*t.source));
        if (impasse_.failure.reason == craftworld::Reason::tool_tier_insufficient)
            return "what tool do I need to mine " + name + "?";
        return "where can I find " + name + " in the " + std::string(craftworld::to_string(impasse_.biome)) + "?";
    }
    return "how do I get " + spaced(rules_.name(t.item)) + "?";
}

void ImpasseTask::absorb(hfm::Belief& b, const std::string& result) const {
    if (result == hfm::kUnknown || result == hfm::kNoResponse) return;
    b.facts.push_back(result);
    b.current = result;
    if (b.resolved < b.slots) ++b.resolved;
}

std::string ImpasseTask::answer_from(const hfm::Belief& b) const {
    if (!b.facts.empty()) {
        std::string out;
        for (std::size_t i = 0; i < b.facts.size(); ++i) {
            if (i) out += ". ";
            out += b.facts[i];
        }
        return out;
    }
    const auto& t = impasse_.subtask;
    if (t.kind == craftworld::SubTaskKind::gather && t.source) return "search a wider area for " + spaced(rules_.name(*t.source));
    return "craft " + spaced(rules_.name(t.item));
}

std::string failure_log(const Impasse& impasse, const RuleSet& rules) {
    std::ostringstream out;
    out << "failure log\n"
        << "task: " << impasse.task_id << "\n"
        << "subtask: " << craftworld::describe(impasse.subtask, rules) << "\n"
        << "failures: " << impasse.n_fail << "\n"
        << "reason: " << craftworld::to_string(impasse.failure.reason) << "\n";
    const auto resource = impasse.subtask.source ? impasse.subtask.source : impasse.failure.item;
    if (resource) out << "resource: " << rules.name(*resource) << "\n";
    out << "inventory: " << (impasse.inventory.empty() ? "empty" : impasse.inventory) << "\n"
        << "biome: " << craftworld::to_string(impasse.biome) << "\n";
    return out.str();
}

}  // namespace ahce::harness
