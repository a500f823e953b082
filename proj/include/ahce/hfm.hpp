#pragma once

// Human feedback module: tag-structured dialogue transcripts, a compact
// parametric dialogue policy, and the think/search/result/answer loop against
// an expert backend.

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ahce/craftworld.hpp"
#include "ahce/qem.hpp"

namespace ahce::hfm {

enum class SegmentKind : std::uint8_t { Think, Search, Result, Answer };

std::string_view to_string(SegmentKind k);
// Exact tag name: think, search, result, Answer.
std::string_view tag_name(SegmentKind k);

struct Segment {
    SegmentKind kind = SegmentKind::Think;
    std::string text;
    bool operator==(const Segment&) const = default;
};

struct DialogueTranscript {
    std::string prompt;
    std::vector<Segment> segments;
    bool budget_forced = false;

    int count(SegmentKind k) const;
    bool operator==(const DialogueTranscript&) const = default;
};

enum class Violation : std::uint8_t {
    unclosed_tag,
    interleaved_tags,
    unexpected_close_tag,
    unknown_tag,
    stray_text,
    result_without_search,
    search_without_result,
    content_after_answer,
};

std::string_view to_string(Violation v);

struct ParseError {
    Violation violation = Violation::stray_text;
    std::size_t position = 0;
    std::string message;
    bool operator==(const ParseError&) const = default;
};

using ParseResult = std::variant<DialogueTranscript, ParseError>;

// Total over arbitrary bytes. Content escapes '<' as &lt; and '&' as &amp;.
ParseResult parse_transcript(std::string_view text);
// Canonical form: tags bit-exact, one segment per line.
std::string serialize(const DialogueTranscript& t);
// Segment grammar check; returns the first violation, if any.
std::optional<ParseError> check_grammar(const DialogueTranscript& t);

inline constexpr const char* kNoResponse = "[no response]";
inline constexpr const char* kUnknown = "unknown";

struct Query {
    std::string id;
    std::string text;
    std::string context_snapshot;
};

struct ExpertResponse {
    std::string query_id;
    std::string text;
    std::int64_t t_review_start_ms = 0;
    std::int64_t t_submit_ms = 0;

    double review_seconds() const { return static_cast<double>(t_submit_ms - t_review_start_ms) / 1000.0; }
};

class ExpertBackend {
  public:
    virtual ~ExpertBackend() = default;
    // nullopt on timeout.
    virtual std::optional<ExpertResponse> ask(const Query& query, std::chrono::milliseconds timeout) = 0;
};

// Belief state over knowledge slots; the task decides what a slot is.
struct Belief {
    int resolved = 0;
    int slots = 0;
    std::string current;
    std::vector<std::string> facts;
    bool last_result_unknown = false;

    bool has_unresolved() const { return resolved < slots; }
};

class DialogueTask {
  public:
    virtual ~DialogueTask() = default;
    virtual std::string prompt() const = 0;
    virtual Belief initial_belief() const = 0;
    virtual std::string query_for(const Belief& b) const = 0;
    virtual void absorb(Belief& b, const std::string& result) const = 0;
    virtual std::string answer_from(const Belief& b) const = 0;
    virtual std::string think_for(const Belief& b) const;
};

inline constexpr int kActions = 3;  // Think, Search, Answer
inline constexpr int kFeatures = 5; // bias, has_unresolved, last_was_think, last_result_unknown, budget_exhausted

enum class DialogueAction : std::uint8_t { Think = 0, Search = 1, Answer = 2 };

using Features = std::array<double, kFeatures>;

// Linear softmax over the three dialogue actions.
class DialoguePolicy {
  public:
    DialoguePolicy() : theta_(kActions * kFeatures, 0.0) {}
    explicit DialoguePolicy(std::vector<double> theta);

    static constexpr std::size_t dimension() { return kActions * kFeatures; }
    const std::vector<double>& parameters() const { return theta_; }
    std::vector<double>& parameters() { return theta_; }

    std::array<double, kActions> logits(const Features& f) const;
    std::array<double, kActions> probabilities(const Features& f) const;
    double log_prob(const Features& f, DialogueAction a) const;
    // d log pi(a|f) / d theta, accumulated into grad with weight w.
    void add_grad_log_prob(const Features& f, DialogueAction a, double w, std::vector<double>& grad) const;
    DialogueAction greedy(const Features& f) const;
    DialogueAction sample(const Features& f, craftworld::Rng& rng) const;

    nlohmann::json to_json() const;
    static DialoguePolicy from_json(const nlohmann::json& doc);

    bool operator==(const DialoguePolicy&) const = default;

  private:
    std::vector<double> theta_;
};

struct DialogueConfig {
    int budget = 6;                // max Search segments
    int max_actions = 10;          // hard cap on policy decisions
    std::chrono::milliseconds timeout{0};
    bool greedy = true;
    std::string query_prefix = "q";
};

struct StepRecord {
    Features features{};
    DialogueAction action = DialogueAction::Think;
};

struct SynthesizedPlan {
    std::string text;
    qem::RoutingDecision parsed;
};

struct DialogueOutcome {
    DialogueTranscript transcript;
    SynthesizedPlan plan;
    std::vector<StepRecord> steps;
    std::vector<ExpertResponse> responses;
    int searches = 0;
    int timeouts = 0;
};

Features features_for(const Belief& b, bool last_was_think, int searches, int budget);

// rng is only used when cfg.greedy is false.
DialogueOutcome run_dialogue(const DialoguePolicy& policy, ExpertBackend& expert, const DialogueTask& task,
                             const DialogueConfig& cfg, craftworld::Rng* rng = nullptr);

enum class ValidationStatus : std::uint8_t { valid, no_actionable_content, unparseable };

std::string_view to_string(ValidationStatus s);

struct ValidationReport {
    ValidationStatus status = ValidationStatus::valid;
    int rules = 0;
    int heuristics = 0;
    int macros = 0;
    std::string remainder;
    qem::RoutingDecision decision;

    bool ok() const { return status == ValidationStatus::valid; }
};

// Parses the Answer under the guidance grammar; unparseable answers fall back
// to a verbatim untyped injection in `decision`.
ValidationReport validate_answer(const SynthesizedPlan& plan, const craftworld::RuleSet& rules);

}  // namespace ahce::hfm
