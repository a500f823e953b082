#pragma once

// Episode orchestration: task suite, low-level performer, scripted expert,
// the plan/perform/self-correct/help loop, metrics tables and ablation sweeps.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ahce/craftworld.hpp"
#include "ahce/grpo.hpp"
#include "ahce/hfm.hpp"
#include "ahce/pim.hpp"
#include "ahce/planner.hpp"
#include "ahce/qem.hpp"

namespace ahce::harness {

using craftworld::ItemId;
using craftworld::RuleSet;
using craftworld::TaskLevel;

std::filesystem::path data_dir();

struct TaskSpec {
    std::string id;
    ItemId target;
    TaskLevel level = TaskLevel::easy;
    int episode_step_budget = 400;
    craftworld::WorldConfig world;
    // FULL, GAP-FACT, GAP-STRAT, or MIXED (GAP-FACT on even seeds, GAP-STRAT on odd).
    std::string gap_profile = "MIXED";

    nlohmann::json to_json(const RuleSet& rules) const;
    static TaskSpec from_json(const nlohmann::json& doc, const RuleSet& rules);
};

// Fifteen tasks, five per level; levels match shortest-plan length bands.
std::vector<TaskSpec> default_suite(const RuleSet& rules);
std::vector<TaskSpec> load_suite(const std::filesystem::path& path, const RuleSet& rules);
const TaskSpec& find_task(const std::vector<TaskSpec>& suite, const std::string& id);

planner::GapProfile resolve_profile(const TaskSpec& task, std::uint64_t seed, const RuleSet& rules);

enum class Variant : std::uint8_t { baseline, log, full };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct PerformerConfig {
    int vision_radius = 2;
    int search_radius = 3;
    int search_growth = 2;
};

struct FrameworkConfig {
    Variant variant = Variant::full;
    pim::PimConfig pim{};
    double step_seconds = 0.5;
    double review_seconds = 15.0;
    double log_noise = 0.2;
    PerformerConfig performer{};
    hfm::DialogueConfig dialogue{};
    std::shared_ptr<const hfm::DialoguePolicy> policy;

    // help disabled for the baseline regardless of n_max
    bool help_enabled() const { return variant != Variant::baseline; }
    nlohmann::json to_json() const;
};

// Deterministic controller that executes one sub-task with primitive actions.
// Retries of the same sub-task widen the search box around the first attempt's
// starting point.
class Performer {
  public:
    Performer(const RuleSet& rules, PerformerConfig cfg, std::uint64_t seed);
    void begin(const craftworld::SubTask& task, const craftworld::WorldState& state);
    craftworld::Action next(const craftworld::WorldState& state);
    int radius() const { return radius_; }

  private:
    std::optional<craftworld::Position> nearest_visible(const craftworld::WorldState& state, ItemId resource) const;
    craftworld::Action wander(const craftworld::WorldState& state);

    const RuleSet& rules_;
    PerformerConfig cfg_;
    craftworld::Rng rng_;
    craftworld::SubTask task_;
    craftworld::Position anchor_;
    bool started_ = false;
    int radius_ = 0;
    std::set<std::pair<int, int>> visited_;
};

// Full-knowledge scripted expert with a simulated review clock.
class ScriptedExpert : public hfm::ExpertBackend {
  public:
    ScriptedExpert(std::shared_ptr<const RuleSet> rules, double review_seconds, double log_noise = 0.0,
                   std::uint64_t seed = 0);
    std::optional<hfm::ExpertResponse> ask(const hfm::Query& query, std::chrono::milliseconds timeout) override;
    void set_clock(std::int64_t ms) { clock_ms_ = ms; }
    std::int64_t clock() const { return clock_ms_; }

    // Reply text for a structured question or a raw failure log.
    std::string answer(const std::string& question);
    std::string reply_to_log(const std::string& log);

  private:
    std::shared_ptr<const RuleSet> rules_;
    std::int64_t review_ms_;
    double log_noise_;
    craftworld::Rng rng_;
    std::int64_t clock_ms_ = 0;
};

// Impasse as a dialogue task: one knowledge slot for the failing sub-task.
struct Impasse {
    std::string task_id;
    craftworld::SubTask subtask;
    craftworld::Outcome failure;
    int n_fail = 0;
    std::string inventory;
    craftworld::Biome biome = craftworld::Biome::forest;
};

class ImpasseTask : public hfm::DialogueTask {
  public:
    ImpasseTask(Impasse impasse, const RuleSet& rules) : impasse_(std::move(impasse)), rules_(rules) {}
    std::string prompt() const override;
    hfm::Belief initial_belief() const override;
    std::string query_for(const hfm::Belief& b) const override;
    void absorb(hfm::Belief& b, const std::string& result) const override;
    std::string answer_from(const hfm::Belief& b) const override;

  private:
    Impasse impasse_;
    const RuleSet& rules_;
};

std::string failure_log(const Impasse& impasse, const RuleSet& rules);

struct TriggerEvent {
    std::uint64_t step = 0;
    int n_fail = 0;
    bool operator==(const TriggerEvent&) const = default;
};

struct QueryTiming {
    std::string id;
    std::int64_t t_review_start_ms = 0;
    std::int64_t t_submit_ms = 0;
    bool operator==(const QueryTiming&) const = default;
};

inline constexpr int kRecordSchemaVersion = 1;

struct EpisodeRecord {
    std::string task_id;
    std::uint64_t seed = 0;
    std::string gap_profile;
    bool success = false;
    std::uint64_t steps = 0;
    double t_agent = 0;
    double t_human = 0;
    double t_total = 0;
    int queries = 0;
    std::vector<std::string> transcripts;
    std::vector<TriggerEvent> trigger_events;
    std::vector<QueryTiming> timings;
    std::vector<std::string> guidance;

    nlohmann::json to_json() const;
    bool operator==(const EpisodeRecord&) const = default;
};

// Builds the expert for one episode; scripted by default.
using ExpertFactory = std::function<std::unique_ptr<hfm::ExpertBackend>(const TaskSpec&, std::uint64_t seed)>;

EpisodeRecord run_episode(const TaskSpec& task, const FrameworkConfig& cfg, std::uint64_t seed,
                          const ExpertFactory& expert = {});

// Ratio of means as a percentage rounded to one decimal.
double ratio_percent(double t_human, double t_total);
std::string format_ratio(double t_human, double t_total);

struct LevelMetrics {
    int episodes = 0;
    double success_rate = 0;
    double human_time_s = 0;
    double total_time_s = 0;
    double human_ratio = 0;
    double mean_queries = 0;
};

LevelMetrics summarize(const std::vector<EpisodeRecord>& records);

struct MetricsRow {
    std::string method;
    std::map<TaskLevel, LevelMetrics> levels;
};

struct SuiteResult {
    std::vector<MetricsRow> rows;
    std::map<std::string, std::vector<EpisodeRecord>> records;  // by method
};

struct VariantSpec {
    std::string name;
    FrameworkConfig config;
};

// Runs every task for `trials` seeds (1..trials) per variant. Episodes run on
// `threads` workers; results are reduced in (task, seed) order.
SuiteResult run_suite(const std::vector<TaskSpec>& tasks, int trials, const std::vector<VariantSpec>& variants,
                      unsigned threads = 0);
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

struct SweepRow {
    std::optional<int> n_max;
    double success_rate = 0;
    double human_ratio = 0;
    double total_time_mean = 0;
    double total_time_var = 0;
    double human_time_mean = 0;
    double mean_queries = 0;
    std::vector<EpisodeRecord> records;
};

std::vector<SweepRow> ablation_sweep(const TaskSpec& task, const std::vector<std::optional<int>>& n_max_values,
                                     int trials, const FrameworkConfig& base, unsigned threads = 0);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

std::vector<EpisodeRecord> run_parallel(const std::vector<std::function<EpisodeRecord()>>& jobs, unsigned threads);

// Trained dialogue policy shipped in data/, or trained on the spot if absent.
std::shared_ptr<const hfm::DialoguePolicy> default_policy();

FrameworkConfig make_config(Variant v, std::optional<int> n_max = 3);

}  // namespace ahce::harness
