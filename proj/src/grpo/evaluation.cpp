#include "ahce/grpo.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <tuple>

namespace ahce::grpo {

std::vector<hopqa::Instance> heldout_set(std::uint64_t seed, int count, int hops_min, int hops_max) {
    std::vector<hopqa::Instance> out;
    const int span = hops_max - hops_min + 1;
    for (int i = 0; i < count; ++i) {
        out.push_back(hopqa::generate(craftworld::mix_seed(seed, static_cast<std::uint64_t>(i)), hops_min + i % span));
    }
    return out;
}

EvalResult evaluate_greedy(const hfm::DialoguePolicy& policy, const std::vector<hopqa::Instance>& tasks,
                           const hfm::DialogueConfig& dialogue) {
    EvalResult res;
    if (tasks.empty()) return res;
    auto cfg = dialogue;
    cfg.greedy = true;
    double correct = 0, queries = 0, hops = 0;
    for (const auto& inst : tasks) {
        hopqa::OracleExpert expert(inst.kb);
        const hopqa::HopTask task(inst.chain);
        auto out = hfm::run_dialogue(policy, expert, task, cfg);
        correct += hopqa::score(out.plan.text, inst.chain);
        queries += out.searches;
        hops += inst.chain.hop_count();
        res.transcripts.push_back(std::move(out.transcript));
    }
    const double n = static_cast<double>(tasks.size());
    res.accuracy = correct / n;
    res.mean_queries = queries / n;
    res.mean_hops = hops / n;
    return res;
}

double expected_accuracy(const hfm::DialoguePolicy& policy, const hopqa::Instance& inst,
                         const hfm::DialogueConfig& dialogue) {
    const hopqa::HopTask task(inst.chain);
    hopqa::OracleExpert expert(inst.kb);

    // Mirrors run_dialogue's control flow, branching on every policy decision.
    std::function<double(hfm::Belief, bool, int, int)> value = [&](hfm::Belief b, bool last_think, int searches,
                                                                   int actions) -> double {
        auto answer_value = [&](const hfm::Belief& bb) { return hopqa::score(task.answer_from(bb), inst.chain); };
        if (actions >= dialogue.max_actions) return answer_value(b);
        const auto f = hfm::features_for(b, last_think, searches, dialogue.budget);
        const auto p = policy.probabilities(f);
        double v = p[static_cast<int>(hfm::DialogueAction::Answer)] * answer_value(b);
        v += p[static_cast<int>(hfm::DialogueAction::Think)] * value(b, true, searches, actions + 1);
        const double ps = p[static_cast<int>(hfm::DialogueAction::Search)];
        if (searches >= dialogue.budget) {
            v += ps * answer_value(b);
        } else if (ps > 0) {
            hfm::Query q{"eval", task.query_for(b), ""};
            const auto text = hopqa::oracle_answer(inst.kb, q).text;
            hfm::Belief next = b;
            task.absorb(next, text);
            next.last_result_unknown = text == hfm::kUnknown || text == hfm::kNoResponse;
            v += ps * value(next, false, searches + 1, actions + 1);
        }
        return v;
    };
    return value(task.initial_belief(), false, 0, 0);
}

double chance_rate(int hops, const hfm::DialogueConfig& dialogue) {
    // P(k resolved, s searches, n actions) under a uniform choice of
    // think / search / answer; every chain query is answered.
    std::map<std::tuple<int, int, int>, double> memo;
    std::function<double(int, int, int)> p = [&](int k, int s, int n) -> double {
        const double done = k == hops ? 1.0 : 0.0;
        if (n >= dialogue.max_actions) return done;
        const auto key = std::tuple(k, s, n);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const double think = p(k, s, n + 1);
        const double search = s >= dialogue.budget ? done : p(std::min(k + 1, hops), s + 1, n + 1);
        const double v = (think + search + done) / 3.0;
        memo[key] = v;
        return v;
    };
    return p(0, 0, 0);
}

}  // namespace ahce::grpo
