#pragma once

// Group relative policy optimization for the dialogue policy: group rollouts,
// normalized advantages, the clipped surrogate with a KL penalty to a fixed
// reference, and exact gradients for the linear-softmax policy class.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ahce/hfm.hpp"
#include "ahce/hopqa.hpp"

namespace ahce::grpo {

class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TrainerConfig {
    int group_size = 8;
    double epsilon = 0.2;
    double beta = 0.01;
    double learning_rate = 0.05;
    int updates = 10000;
    std::uint64_t seed = 1;
    // Gradient steps per collected group; the first step sits at ratio 1.
    int inner_epochs = 2;
    int hops_min = 2;
    int hops_max = 3;
    hfm::DialogueConfig dialogue{};
    double search_cost = 0.05;
    double forced_penalty = 0.1;
    int eval_every = 50;
    int heldout_tasks = 100;
    std::uint64_t heldout_seed = 900001;
    // Stop early once held-out greedy accuracy reaches this and the mean query
    // count is within query_slack of the mean hop count (0 disables).
    double target_accuracy = 0.0;
    double query_slack = 0.5;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainerConfig from_json(const nlohmann::json& doc);
};

enum class SnapshotRole : std::uint8_t { old, reference };

class PolicySnapshot {
  public:
    PolicySnapshot(const hfm::DialoguePolicy& policy, SnapshotRole role) : policy_(policy), role_(role) {}
    const hfm::DialoguePolicy& policy() const { return policy_; }
    SnapshotRole role() const { return role_; }

  private:
    const hfm::DialoguePolicy policy_;
    const SnapshotRole role_;
};

struct Rollout {
    hfm::DialogueTranscript transcript;
    std::vector<hfm::StepRecord> steps;
    std::string answer;
    int searches = 0;
    double old_log_prob = 0;
};

struct RolloutGroup {
    hopqa::Instance input;
    std::vector<Rollout> rollouts;
    std::vector<double> rewards;
};

double reward(const Rollout& r, const hopqa::FactChain& chain, const TrainerConfig& cfg);

RolloutGroup collect_group(const PolicySnapshot& policy_old, const hopqa::Instance& task, int group_size,
                           std::uint64_t seed, const TrainerConfig& cfg = {});

std::vector<double> normalize_advantages(const std::vector<double>& rewards);

struct ObjectiveResult {
    double objective = 0;
    std::vector<double> gradient;
    double kl = 0;
    double clip_fraction = 0;
};

ObjectiveResult objective_and_gradient(const std::vector<double>& theta, const RolloutGroup& group,
                                       const PolicySnapshot& ref, const TrainerConfig& cfg);

// Categorical KL(p || q) at one state.
double state_kl(const hfm::DialoguePolicy& p, const hfm::DialoguePolicy& q, const hfm::Features& f);

struct CurvePoint {
    int update = 0;
    double mean_reward = 0;
    double kl = 0;
    double clip_fraction = 0;
    std::optional<double> heldout_accuracy;
    std::optional<double> heldout_queries;
};

struct TrainResult {
    hfm::DialoguePolicy policy;
    std::vector<CurvePoint> curve;
    bool diverged = false;
    int updates_run = 0;
};

TrainResult train(const TrainerConfig& cfg, const hfm::DialoguePolicy& init = {});

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

inline constexpr int kCheckpointVersion = 1;
nlohmann::json checkpoint(const hfm::DialoguePolicy& policy, const TrainerConfig& cfg);
hfm::DialoguePolicy load_checkpoint(const nlohmann::json& doc);

// Evaluation on held-out instances.
struct EvalResult {
    double accuracy = 0;
    double mean_queries = 0;
    double mean_hops = 0;
    std::vector<hfm::DialogueTranscript> transcripts;
};

std::vector<hopqa::Instance> heldout_set(std::uint64_t seed, int count, int hops_min, int hops_max);
EvalResult evaluate_greedy(const hfm::DialoguePolicy& policy, const std::vector<hopqa::Instance>& tasks,
                           const hfm::DialogueConfig& dialogue);
// Exact expected exact-match accuracy of the stochastic policy, by enumerating
// every action sequence.
double expected_accuracy(const hfm::DialoguePolicy& policy, const hopqa::Instance& task,
                         const hfm::DialogueConfig& dialogue);
// Success probability of the uniform random policy, in closed form.
double chance_rate(int hops, const hfm::DialogueConfig& dialogue);

}  // namespace ahce::grpo
