#include "ahce/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ahce::grpo {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

double reward(const Rollout& r, const hopqa::FactChain& chain, const TrainerConfig& cfg) {
    return hopqa::score(r.answer, chain) - cfg.search_cost * r.searches -
           (r.transcript.budget_forced ? cfg.forced_penalty : 0.0);
}

RolloutGroup collect_group(const PolicySnapshot& policy_old, const hopqa::Instance& task, int group_size,
                           std::uint64_t seed, const TrainerConfig& cfg) {
    if (group_size < 2) throw craftworld::DomainError("group size must be at least 2");
    RolloutGroup group;
    group.input = task;
    const hopqa::HopTask dialogue_task(task.chain);
    auto dcfg = cfg.dialogue;
    dcfg.greedy = false;
    for (int i = 0; i < group_size; ++i) {
        hopqa::OracleExpert expert(task.kb);
        craftworld::Rng rng(craftworld::mix_seed(seed, static_cast<std::uint64_t>(i)));
        auto out = hfm::run_dialogue(policy_old.policy(), expert, dialogue_task, dcfg, &rng);
        if (expert.queries() > 0 && out.responses.empty()) throw craftworld::ConfigError("oracle gave no responses");
        Rollout r;
        r.transcript = std::move(out.transcript);
        r.steps = std::move(out.steps);
        r.answer = out.plan.text;
        r.searches = out.searches;
        for (const auto& s : r.steps) r.old_log_prob += policy_old.policy().log_prob(s.features, s.action);
        require_finite(r.old_log_prob, "rollout log-probability");
        group.rewards.push_back(reward(r, task.chain, cfg));
        group.rollouts.push_back(std::move(r));
    }
    return group;
}

std::vector<double> normalize_advantages(const std::vector<double>& rewards) {
    if (rewards.size() < 2) throw craftworld::DomainError("advantage normalization needs at least 2 rewards");
    const double n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double var = 0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    std::vector<double> out(rewards.size(), 0.0);
    if (sd < 1e-8) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
    return out;
}

double state_kl(const hfm::DialoguePolicy& p, const hfm::DialoguePolicy& q, const hfm::Features& f) {
    const auto pp = p.probabilities(f);
    double kl = 0;
    for (int a = 0; a < hfm::kActions; ++a) {
        const auto act = static_cast<hfm::DialogueAction>(a);
        kl += pp[a] * (p.log_prob(f, act) - q.log_prob(f, act));
    }
    return std::max(kl, 0.0);
}

ObjectiveResult objective_and_gradient(const std::vector<double>& theta, const RolloutGroup& group,
                                       const PolicySnapshot& ref, const TrainerConfig& cfg) {
    const auto G = group.rollouts.size();
    if (G < 2 || group.rewards.size() != G) throw craftworld::DomainError("malformed rollout group");
    const hfm::DialoguePolicy pi{std::vector<double>(theta)};
    const auto adv = normalize_advantages(group.rewards);

    ObjectiveResult res;
    res.gradient.assign(theta.size(), 0.0);
    double surrogate = 0;
    int clipped = 0;

    for (std::size_t i = 0; i < G; ++i) {
        const auto& r = group.rollouts[i];
        double logp = 0;
        for (const auto& s : r.steps) logp += pi.log_prob(s.features, s.action);
        const double ratio = std::exp(logp - r.old_log_prob);
        require_finite(ratio, "probability ratio");

        const double unclipped = ratio * adv[i];
        const double clipped_term = std::clamp(ratio, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon) * adv[i];
        if (unclipped <= clipped_term) {
            surrogate += unclipped;
            const double w = adv[i] * ratio / static_cast<double>(G);
            for (const auto& s : r.steps) pi.add_grad_log_prob(s.features, s.action, w, res.gradient);
        } else {
            surrogate += clipped_term;
            ++clipped;
        }

        for (const auto& s : r.steps) {
            const auto p = pi.probabilities(s.features);
            const double kl = state_kl(pi, ref.policy(), s.features);
            res.kl += kl;
            // dKL/dz_b = p_b (log p_b - log q_b - KL)
            for (int b = 0; b < hfm::kActions; ++b) {
                const auto act = static_cast<hfm::DialogueAction>(b);
                const double dz = p[b] * (pi.log_prob(s.features, act) - ref.policy().log_prob(s.features, act) - kl);
                const double w = -cfg.beta * dz / static_cast<double>(G);
                for (int j = 0; j < hfm::kFeatures; ++j) res.gradient[b * hfm::kFeatures + j] += w * s.features[j];
            }
        }
    }
    res.kl /= static_cast<double>(G);
    res.objective = surrogate / static_cast<double>(G) - cfg.beta * res.kl;
    res.clip_fraction = static_cast<double>(clipped) / static_cast<double>(G);
    require_finite(res.objective, "objective");
    for (double g : res.gradient) require_finite(g, "gradient component");
    return res;
}

}  // namespace ahce::grpo
