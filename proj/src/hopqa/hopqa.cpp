#include "ahce/hopqa.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>

namespace ahce::hopqa {

namespace {

using nlohmann::json;

constexpr const char* kOnsets[] = {"Ka", "Lo", "Mi", "Ru", "Ze", "Ta", "Vo", "Ni", "Pe", "Su", "Da", "Fi"};
constexpr const char* kMiddles[] = {"la", "ri", "mo", "ne", "sa", "tu", "vi", "ko", "de", "ba", "xo", "ge"};
constexpr const char* kCodas[] = {"ran", "vel", "mor", "tis", "dun", "lex", "bor", "sil"};

std::string entity_name(std::uint64_t i) {
    constexpr std::size_t no = std::size(kOnsets), nm = std::size(kMiddles), nc = std::size(kCodas);
    const auto a = i % no, b = (i / no) % nm, c = (i / (no * nm)) % nc;
    return std::string(kOnsets[a]) + kMiddles[b] + kCodas[c];
}

constexpr std::size_t kEntityCount = std::size(kOnsets) * std::size(kMiddles) * std::size(kCodas);

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool iequals_prefix(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    }
    return true;
}

json fact_json(const Fact& f) { return {{"subject", f.subject}, {"relation", f.relation}, {"object", f.object}}; }

Fact fact_from(const json& j) {
    return {j.at("subject").get<std::string>(), j.at("relation").get<std::string>(), j.at("object").get<std::string>()};
}

}  // namespace

std::vector<std::string> entity_vocabulary() {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < kEntityCount; ++i) out.push_back(entity_name(i));
    return out;
}

const std::vector<std::string>& relation_vocabulary() {
    static const std::vector<std::string> rels = {"mentor", "rival", "birthplace", "founder", "patron",
                                                  "neighbor", "sibling", "employer", "teacher", "author"};
    return rels;
}

std::optional<std::string> OracleKB::lookup(const std::string& entity, const std::string& relation) const {
    auto it = facts.find({entity, relation});
    if (it == facts.end()) return std::nullopt;
    return it->second;
}

Instance generate(std::uint64_t seed, int hops) {
    if (hops < kMinHops || hops > kMaxHops)
        throw craftworld::DomainError("hop count must be in [" + std::to_string(kMinHops) + ", " +
                                      std::to_string(kMaxHops) + "]");
    craftworld::Rng rng(craftworld::mix_seed(seed, 0x40u + static_cast<std::uint64_t>(hops)));
    const auto& rels = relation_vocabulary();

    std::vector<std::string> chain_entities;
    std::set<std::string> used;
    while (static_cast<int>(chain_entities.size()) < hops + 1) {
        auto e = entity_name(rng.below(kEntityCount));
        if (used.insert(e).second) chain_entities.push_back(e);
    }
    auto fresh_entity = [&]() {
        for (;;) {
            auto e = entity_name(rng.below(kEntityCount));
            if (!used.count(e)) return e;
        }
    };

    Instance inst;
    inst.seed = seed;
    auto& chain = inst.chain;
    for (int k = 0; k < hops; ++k) {
        const auto& rel = rels[rng.below(rels.size())];
        chain.hops.push_back({chain_entities[k], rel, chain_entities[k + 1]});
        inst.kb.facts[{chain_entities[k], rel}] = chain_entities[k + 1];
    }

    // Distractors never point at chain entities, so they cannot shortcut a hop.
    auto add_distractor = [&](const std::string& subject) {
        for (int attempt = 0; attempt < 32; ++attempt) {
            const auto& rel = rels[rng.below(rels.size())];
            if (inst.kb.facts.count({subject, rel})) continue;
            Fact f{subject, rel, fresh_entity()};
            inst.kb.facts[{f.subject, f.relation}] = f.object;
            chain.distractors.push_back(f);
            return;
        }
    };
    for (const auto& e : chain_entities) add_distractor(e);
    for (int i = 0; i < 2; ++i) add_distractor(fresh_entity());

    std::string q = "What is the " + chain.hops.back().relation;
    for (int k = hops - 2; k >= 0; --k) q += " of the " + chain.hops[k].relation;
    q += " of " + chain.start() + "?";
    chain.question = q;
    return inst;
}

std::string format_query(const std::string& relation, const std::string& entity) {
    return "what is the " + relation + " of " + entity + "?";
}

std::optional<std::pair<std::string, std::string>> parse_query(const std::string& text) {
    std::string s = trim(text);
    if (!iequals_prefix(s, "what is the ")) return std::nullopt;
    s = s.substr(12);
    if (!s.empty() && s.back() == '?') s.pop_back();
    const auto of = s.find(" of ");
    if (of == std::string::npos) return std::nullopt;
    auto relation = trim(s.substr(0, of));
    auto entity = trim(s.substr(of + 4));
    if (relation.empty() || entity.empty()) return std::nullopt;
    return std::pair{relation, entity};
}

std::optional<std::pair<std::string, std::vector<std::string>>> parse_question(const std::string& question) {
    std::string s = trim(question);
    if (!iequals_prefix(s, "what is the ") || s.back() != '?') return std::nullopt;
    s = s.substr(12, s.size() - 13);
    std::vector<std::string> rels;
    for (auto pos = s.find(" of the "); pos != std::string::npos; pos = s.find(" of the ")) {
        rels.push_back(s.substr(0, pos));
        s = s.substr(pos + 8);
    }
    const auto of = s.find(" of ");
    if (of == std::string::npos) return std::nullopt;
    rels.push_back(s.substr(0, of));
    std::reverse(rels.begin(), rels.end());
    return std::pair{s.substr(of + 4), rels};
}

hfm::ExpertResponse oracle_answer(const OracleKB& kb, const hfm::Query& query) {
    hfm::ExpertResponse r;
    r.query_id = query.id;
    r.text = hfm::kUnknown;
    if (auto parsed = parse_query(query.text)) {
        if (auto obj = kb.lookup(parsed->second, parsed->first)) r.text = *obj;
    }
    return r;
}

double score(const std::string& answer, const FactChain& chain) { return answer == chain.answer() ? 1.0 : 0.0; }

std::optional<hfm::ExpertResponse> OracleExpert::ask(const hfm::Query& query, std::chrono::milliseconds) {
    ++queries_;
    return oracle_answer(kb_, query);
}

HopTask::HopTask(const FactChain& chain) : question_(chain.question) {
    auto parsed = parse_question(chain.question);
    if (!parsed) throw craftworld::ConfigError("question outside the query grammar: " + chain.question);
    start_ = parsed->first;
    relations_ = parsed->second;
}

std::string HopTask::prompt() const { return question_; }

hfm::Belief HopTask::initial_belief() const {
    hfm::Belief b;
    b.slots = static_cast<int>(relations_.size());
    b.current = start_;
    return b;
}

std::string HopTask::query_for(const hfm::Belief& b) const {
    const int k = std::min(b.resolved, b.slots - 1);
    const std::string& subject = k == 0 ? start_ : b.facts[k - 1];
    return format_query(relations_[k], subject);
}

void HopTask::absorb(hfm::Belief& b, const std::string& result) const {
    if (!b.has_unresolved() || result == hfm::kUnknown || result == hfm::kNoResponse) return;
    b.facts.push_back(result);
    b.current = result;
    ++b.resolved;
}

std::string HopTask::answer_from(const hfm::Belief& b) const { return b.current; }

json Instance::to_json() const {
    json hops = json::array(), distractors = json::array();
    for (const auto& f : chain.hops) hops.push_back(fact_json(f));
    for (const auto& f : chain.distractors) distractors.push_back(fact_json(f));
    return {{"seed", seed}, {"question", chain.question}, {"answer", chain.answer()}, {"hops", hops},
            {"distractors", distractors}};
}

Instance Instance::from_json(const json& doc) {
    Instance inst;
    inst.seed = doc.at("seed").get<std::uint64_t>();
    inst.chain.question = doc.at("question").get<std::string>();
    for (const auto& f : doc.at("hops")) inst.chain.hops.push_back(fact_from(f));
    for (const auto& f : doc.at("distractors")) inst.chain.distractors.push_back(fact_from(f));
    for (const auto* list : {&inst.chain.hops, &inst.chain.distractors}) {
        for (const auto& f : *list) inst.kb.facts[{f.subject, f.relation}] = f.object;
    }
    if (inst.chain.hops.empty()) throw craftworld::ConfigError("instance without hops");
    return inst;
}

void write_jsonl(std::ostream& out, const std::vector<Instance>& instances) {
    for (const auto& inst : instances) out << inst.to_json().dump() << '\n';
}

std::vector<Instance> read_jsonl(std::istream& in) {
    std::vector<Instance> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(Instance::from_json(json::parse(line)));
    }
    return out;
}

}  // namespace ahce::hopqa
