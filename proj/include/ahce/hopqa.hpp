#pragma once

// Synthetic multi-hop question answering: fact chains over a made-up entity
// vocabulary, an oracle answering single-hop queries, and exact-match scoring.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ahce/hfm.hpp"

namespace ahce::hopqa {

struct Fact {
    std::string subject;
    std::string relation;
    std::string object;
    bool operator==(const Fact&) const = default;
};

struct FactChain {
    std::vector<Fact> hops;
    std::string question;
    std::vector<Fact> distractors;

    int hop_count() const { return static_cast<int>(hops.size()); }
    const std::string& start() const { return hops.front().subject; }
    const std::string& answer() const { return hops.back().object; }
    bool operator==(const FactChain&) const = default;
};

struct OracleKB {
    std::map<std::pair<std::string, std::string>, std::string> facts;

    std::optional<std::string> lookup(const std::string& entity, const std::string& relation) const;
    bool operator==(const OracleKB&) const = default;
};

struct Instance {
    std::uint64_t seed = 0;
    FactChain chain;
    OracleKB kb;

    nlohmann::json to_json() const;
    static Instance from_json(const nlohmann::json& doc);
    bool operator==(const Instance&) const = default;
};

inline constexpr int kMinHops = 2;
inline constexpr int kMaxHops = 4;

Instance generate(std::uint64_t seed, int hops);

// Every entity name the generator can produce, and the relation names.
std::vector<std::string> entity_vocabulary();
const std::vector<std::string>& relation_vocabulary();

// "what is the <relation> of <Entity>?"
std::string format_query(const std::string& relation, const std::string& entity);
std::optional<std::pair<std::string, std::string>> parse_query(const std::string& text);

// Never throws; unparseable or unknown queries get "unknown". Review time is
// zero.
hfm::ExpertResponse oracle_answer(const OracleKB& kb, const hfm::Query& query);

double score(const std::string& answer, const FactChain& chain);

class OracleExpert : public hfm::ExpertBackend {
  public:
    explicit OracleExpert(const OracleKB& kb) : kb_(kb) {}
    std::optional<hfm::ExpertResponse> ask(const hfm::Query& query, std::chrono::milliseconds timeout) override;
    int queries() const { return queries_; }

  private:
    const OracleKB& kb_;
    int queries_ = 0;
};

// Dialogue task: one knowledge slot per hop, resolved in chain order.
class HopTask : public hfm::DialogueTask {
  public:
    explicit HopTask(const FactChain& chain);
    std::string prompt() const override;
    hfm::Belief initial_belief() const override;
    std::string query_for(const hfm::Belief& b) const override;
    void absorb(hfm::Belief& b, const std::string& result) const override;
    std::string answer_from(const hfm::Belief& b) const override;

  private:
    std::string question_;
    std::string start_;
    std::vector<std::string> relations_;
};

// Relation chain and start entity recovered from the question text.
std::optional<std::pair<std::string, std::vector<std::string>>> parse_question(const std::string& question);

void write_jsonl(std::ostream& out, const std::vector<Instance>& instances);
std::vector<Instance> read_jsonl(std::istream& in);

}  // namespace ahce::hopqa
