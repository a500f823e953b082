#include "ahce/hfm.hpp"

namespace ahce::hfm {

std::string DialogueTask::think_for(const Belief& b) const {
    if (b.has_unresolved()) return "I still need to find out: " + query_for(b);
    return "I know enough to answer.";
}

Features features_for(const Belief& b, bool last_was_think, int searches, int budget) {
    return {1.0, b.has_unresolved() ? 1.0 : 0.0, last_was_think ? 1.0 : 0.0, b.last_result_unknown ? 1.0 : 0.0,
            searches >= budget ? 1.0 : 0.0};
}

DialogueOutcome run_dialogue(const DialoguePolicy& policy, ExpertBackend& expert, const DialogueTask& task,
                             const DialogueConfig& cfg, craftworld::Rng* rng) {
    if (cfg.budget < 1) throw std::invalid_argument("dialogue budget must be at least 1");
    if (!cfg.greedy && !rng) throw std::invalid_argument("sampled dialogue needs an rng");

    DialogueOutcome out;
    auto& t = out.transcript;
    t.prompt = task.prompt();
    Belief belief = task.initial_belief();
    bool last_think = false;

    auto finish = [&](bool forced) {
        t.budget_forced = forced;
        t.segments.push_back({SegmentKind::Answer, task.answer_from(belief)});
        out.plan.text = t.segments.back().text;
    };

    for (int actions = 0;; ++actions) {
        if (actions >= cfg.max_actions) {
            finish(true);
            break;
        }
        const auto f = features_for(belief, last_think, out.searches, cfg.budget);
        const auto a = cfg.greedy ? policy.greedy(f) : policy.sample(f, *rng);
        out.steps.push_back({f, a});

        if (a == DialogueAction::Answer) {
            finish(false);
            break;
        }
        if (a == DialogueAction::Think) {
            t.segments.push_back({SegmentKind::Think, task.think_for(belief)});
            last_think = true;
            continue;
        }
        if (out.searches >= cfg.budget) {
            finish(true);
            break;
        }
        Query q;
        q.id = cfg.query_prefix + "-" + std::to_string(out.searches + 1);
        q.text = task.query_for(belief);
        q.context_snapshot = t.prompt + "\n" + serialize(t);
        t.segments.push_back({SegmentKind::Search, q.text});
        ++out.searches;
        auto resp = expert.ask(q, cfg.timeout);
        std::string text = kNoResponse;
        if (resp) {
            text = resp->text;
            out.responses.push_back(*resp);
        } else {
            ++out.timeouts;
        }
        t.segments.push_back({SegmentKind::Result, text});
        task.absorb(belief, text);
        belief.last_result_unknown = text == kNoResponse || text == kUnknown;
        last_think = false;
    }
    return out;
}

std::string_view to_string(ValidationStatus s) {
    switch (s) {
        case ValidationStatus::valid: return "valid";
        case ValidationStatus::no_actionable_content: return "no_actionable_content";
        case ValidationStatus::unparseable: return "unparseable";
    }
    return "valid";
}

ValidationReport validate_answer(const SynthesizedPlan& plan, const craftworld::RuleSet& rules) {
    ValidationReport report;
    if (plan.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        report.status = ValidationStatus::no_actionable_content;
        return report;
    }
    try {
        report.decision = qem::route({plan.text, qem::GuidanceSource::hfm_synthesized}, rules);
    } catch (const qem::RoutingError&) {
        report.status = ValidationStatus::unparseable;
        report.remainder = plan.text;
        report.decision = qem::route({plan.text, qem::GuidanceSource::raw_log_reply}, rules);
        return report;
    }
    report.rules = report.decision.rule_count();
    report.heuristics = report.decision.heuristic_count();
    report.macros = static_cast<int>(report.decision.macros.size());
    report.remainder = report.decision.unparsed_remainder;
    return report;
}

}  // namespace ahce::hfm
