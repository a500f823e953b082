#include "ahce/grpo.hpp"

#include <cmath>
#include <numeric>

namespace ahce::grpo {

void TrainerConfig::validate() const {
    if (group_size < 2) throw craftworld::ConfigError("group size must be at least 2");
    if (!(epsilon > 0 && epsilon < 1)) throw craftworld::ConfigError("epsilon must lie in (0, 1)");
    if (beta < 0) throw craftworld::ConfigError("beta must be non-negative");
    if (!(learning_rate > 0)) throw craftworld::ConfigError("learning rate must be positive");
    if (updates < 0 || inner_epochs < 1) throw craftworld::ConfigError("updates and inner epochs out of range");
    if (hops_min < hopqa::kMinHops || hops_max > hopqa::kMaxHops || hops_min > hops_max)
        throw craftworld::ConfigError("hop range out of bounds");
    if (dialogue.budget < 1 || dialogue.max_actions < 1) throw craftworld::ConfigError("dialogue limits must be positive");
}

nlohmann::json TrainerConfig::to_json() const {
    return {{"group_size", group_size},       {"epsilon", epsilon},
            {"beta", beta},                   {"learning_rate", learning_rate},
            {"updates", updates},             {"seed", seed},
            {"inner_epochs", inner_epochs},   {"hops_min", hops_min},
            {"hops_max", hops_max},           {"budget", dialogue.budget},
            {"max_actions", dialogue.max_actions}, {"search_cost", search_cost},
            {"forced_penalty", forced_penalty}};
}

TrainerConfig TrainerConfig::from_json(const nlohmann::json& doc) {
    TrainerConfig c;
    c.group_size = doc.value("group_size", c.group_size);
    c.epsilon = doc.value("epsilon", c.epsilon);
    c.beta = doc.value("beta", c.beta);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.updates = doc.value("updates", c.updates);
    c.seed = doc.value("seed", c.seed);
    c.inner_epochs = doc.value("inner_epochs", c.inner_epochs);
    c.hops_min = doc.value("hops_min", c.hops_min);
    c.hops_max = doc.value("hops_max", c.hops_max);
    c.dialogue.budget = doc.value("budget", c.dialogue.budget);
    c.dialogue.max_actions = doc.value("max_actions", c.dialogue.max_actions);
    c.search_cost = doc.value("search_cost", c.search_cost);
    c.forced_penalty = doc.value("forced_penalty", c.forced_penalty);
    c.validate();
    return c;
}

TrainResult train(const TrainerConfig& cfg, const hfm::DialoguePolicy& init) {
    cfg.validate();
    TrainResult result{init, {}, false, 0};
    const PolicySnapshot ref(init, SnapshotRole::reference);
    std::vector<double> theta = init.parameters();
    const auto heldout = heldout_set(cfg.heldout_seed, cfg.heldout_tasks, cfg.hops_min, cfg.hops_max);
    const int span = cfg.hops_max - cfg.hops_min + 1;

    for (int u = 0; u < cfg.updates; ++u) {
        const auto task_seed = craftworld::mix_seed(cfg.seed, static_cast<std::uint64_t>(u));
        const int hops = cfg.hops_min + static_cast<int>(task_seed % static_cast<std::uint64_t>(span));
        const auto task = hopqa::generate(task_seed, hops);
        const PolicySnapshot old(hfm::DialoguePolicy(theta), SnapshotRole::old);
        const auto group = collect_group(old, task, cfg.group_size, craftworld::mix_seed(task_seed, 0x9e0u), cfg);

        CurvePoint point;
        point.update = u + 1;
        point.mean_reward = std::accumulate(group.rewards.begin(), group.rewards.end(), 0.0) /
                            static_cast<double>(group.rewards.size());
        try {
            std::vector<double> next = theta;
            for (int e = 0; e < cfg.inner_epochs; ++e) {
                const auto res = objective_and_gradient(next, group, ref, cfg);
                for (std::size_t k = 0; k < next.size(); ++k) next[k] += cfg.learning_rate * res.gradient[k];
                point.kl = res.kl;
                point.clip_fraction = res.clip_fraction;
            }
            for (double v : next) {
                if (!std::isfinite(v)) throw NumericalError("non-finite parameter after update");
            }
            theta = std::move(next);
        } catch (const NumericalError&) {
            result.diverged = true;
            break;
        }
        result.policy = hfm::DialoguePolicy(theta);
        result.updates_run = u + 1;

        const bool last = u + 1 == cfg.updates;
        bool reached = false;
        if (cfg.eval_every > 0 && ((u + 1) % cfg.eval_every == 0 || last)) {
            const auto eval = evaluate_greedy(result.policy, heldout, cfg.dialogue);
            point.heldout_accuracy = eval.accuracy;
            point.heldout_queries = eval.mean_queries;
            reached = cfg.target_accuracy > 0 && eval.accuracy >= cfg.target_accuracy &&
                      eval.mean_queries <= eval.mean_hops + cfg.query_slack;
        }
        result.curve.push_back(point);
        if (reached) break;
    }
    return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "update,mean_reward,kl,clip_fraction,heldout_accuracy,heldout_queries\n";
    for (const auto& p : curve) {
        out << p.update << ',' << p.mean_reward << ',' << p.kl << ',' << p.clip_fraction << ',';
        if (p.heldout_accuracy) out << *p.heldout_accuracy;
        out << ',';
        if (p.heldout_queries) out << *p.heldout_queries;
        out << '\n';
    }
}

nlohmann::json checkpoint(const hfm::DialoguePolicy& policy, const TrainerConfig& cfg) {
    return {{"version", kCheckpointVersion}, {"config", cfg.to_json()}, {"parameters", policy.parameters()}};
}

hfm::DialoguePolicy load_checkpoint(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("version", 0) != kCheckpointVersion)
        throw craftworld::ConfigError("unsupported policy checkpoint version");
    return hfm::DialoguePolicy(doc.at("parameters").get<std::vector<double>>());
}

}  // namespace ahce::grpo
