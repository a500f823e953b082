#include "ahce/harness.hpp"

#include <sstream>

namespace ahce::harness {

namespace {

using craftworld::Outcome;
using craftworld::Reason;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string inventory_text(const craftworld::Inventory& inv, const RuleSet& rules) {
    std::ostringstream out;
    bool first = true;
    for (std::size_t i = 0; i < inv.size(); ++i) {
        const ItemId id{static_cast<std::uint16_t>(i)};
        if (inv.count(id) == 0) continue;
        if (!first) out << ", ";
        out << rules.name(id) << " x" << inv.count(id);
        first = false;
    }
    return out.str();
}

class Episode {
  public:
    Episode(const TaskSpec& task, const FrameworkConfig& cfg, std::uint64_t seed, const ExpertFactory& factory)
        : task_(task),
          cfg_(cfg),
          rules_(RuleSet::defaults()),
          world_seed_(craftworld::mix_seed(seed, fnv1a(task.id))),
          state_(craftworld::spawn_world(world_seed_, task.world, *rules_)),
          kb_(rules_, resolve_profile(task, seed, *rules_)),
          tracker_(cfg.pim),
          performer_(*rules_, cfg.performer, craftworld::mix_seed(world_seed_, 1)) {
        record_.task_id = task.id;
        record_.seed = seed;
        record_.gap_profile = kb_.gap_profile().name;
        if (factory) expert_ = factory(task, seed);
        if (!expert_) {
            expert_ = std::make_unique<ScriptedExpert>(rules_, cfg.review_seconds, cfg.log_noise,
                                                       craftworld::mix_seed(world_seed_, 2));
        }
        scripted_ = dynamic_cast<ScriptedExpert*>(expert_.get());
        if (cfg.variant == Variant::full && cfg.help_enabled() && !cfg.policy)
            throw craftworld::ConfigError("full variant needs a dialogue policy");
    }

    EpisodeRecord run() {
        if (!replan()) return finish();
        while (true) {
            if (state_.inventory.has(task_.target)) {
                record_.success = true;
                break;
            }
            if (state_.step_count >= static_cast<std::uint64_t>(task_.episode_step_budget)) break;
            drop_satisfied();
            if (plan_.subtasks.empty() && !replan()) break;
            if (plan_.subtasks.empty()) continue;
            step_once();
        }
        return finish();
    }

  private:
    bool satisfied(const craftworld::SubTask& t) const { return state_.inventory.count(t.item) >= t.target_count; }

    void begin_front() {
        last_failure_.reset();
        if (!plan_.subtasks.empty()) performer_.begin(plan_.subtasks.front(), state_);
    }

    void drop_satisfied() {
        bool dropped = false;
        while (!plan_.subtasks.empty() && satisfied(plan_.subtasks.front())) {
            plan_.subtasks.erase(plan_.subtasks.begin());
            tracker_.record_success();
            dropped = true;
        }
        if (dropped) begin_front();
    }

    bool replan() {
        try {
            plan_ = planner::decompose(task_.target, kb_, injections_, state_.inventory, cfg_.pim.s_max);
        } catch (const planner::PlannerStuck&) {
            return false;
        }
        planner::tick(injections_);
        begin_front();
        return true;
    }

    void self_correct(const Outcome& failure) {
        plan_ = planner::self_correct(plan_, failure, planner::effective_knowledge(kb_, injections_),
                                      state_.inventory);
        begin_front();
    }

    std::optional<craftworld::Action> macro_action() {
        while (true) {
            if (active_) {
                const bool done = macro_index_ >= active_->expansion.size() ||
                                  qem::until_met(*active_, macro_start_, state_);
                if (!done) return active_->expansion[macro_index_++];
                active_.reset();
            }
            if (macros_.empty()) return std::nullopt;
            active_ = macros_.front();
            macros_.pop_front();
            macro_index_ = 0;
            macro_start_ = state_;
        }
    }

    void step_once() {
        auto action = macro_action();
        const bool from_macro = action.has_value();
        if (!action) action = performer_.next(state_);
        const auto outcome = craftworld::apply_action(state_, *action, *rules_);
        if (!outcome.success) last_failure_ = outcome;

        const auto front = plan_.subtasks.front();
        const bool finished = satisfied(front);
        const bool timed_out = tracker_.observe_step(finished);
        if (finished) {
            plan_.subtasks.erase(plan_.subtasks.begin());
            begin_front();
            return;
        }
        if (!outcome.success && !from_macro && front.kind == craftworld::SubTaskKind::craft) {
            self_correct(outcome);
            return;
        }
        if (!timed_out) return;

        const auto failure = last_failure_.value_or(Outcome::fail(Reason::resource_absent, front.source));
        if (cfg_.help_enabled() && tracker_.should_seek_help()) {
            record_.trigger_events.push_back({state_.step_count, tracker_.n_fail()});
            seek_help(front, failure);
            if (!replan()) self_correct(failure);
        } else {
            self_correct(failure);
        }
    }

    void note_response(const hfm::ExpertResponse& r) {
        record_.timings.push_back({r.query_id, r.t_review_start_ms, r.t_submit_ms});
        human_ms_ += r.t_submit_ms - r.t_review_start_ms;
    }

    void seek_help(const craftworld::SubTask& front, const Outcome& failure) {
        ++help_calls_;
        if (scripted_) {
            scripted_->set_clock(static_cast<std::int64_t>(state_.step_count) *
                                     static_cast<std::int64_t>(cfg_.step_seconds * 1000.0 + 0.5) +
                                 human_ms_);
        }
        Impasse impasse{task_.id,          front, failure, tracker_.n_fail(), inventory_text(state_.inventory, *rules_),
                        state_.current_biome()};
        qem::RoutingDecision decision;
        if (cfg_.variant == Variant::full) {
            ImpasseTask dialogue_task(impasse, *rules_);
            auto dc = cfg_.dialogue;
            dc.query_prefix = "h" + std::to_string(help_calls_);
            const auto outcome = hfm::run_dialogue(*cfg_.policy, *expert_, dialogue_task, dc);
            record_.transcripts.push_back(hfm::serialize(outcome.transcript));
            record_.queries += outcome.searches;
            for (const auto& r : outcome.responses) note_response(r);
            record_.guidance.push_back(outcome.plan.text);
            decision = hfm::validate_answer(outcome.plan, *rules_).decision;
        } else {
            hfm::Query q{"h" + std::to_string(help_calls_) + "-1", failure_log(impasse, *rules_), ""};
            ++record_.queries;
            const auto resp = expert_->ask(q, cfg_.dialogue.timeout);
            if (!resp) return;
            note_response(*resp);
            record_.guidance.push_back(resp->text);
            try {
                decision = qem::route({resp->text, qem::GuidanceSource::raw_log_reply}, *rules_);
            } catch (const qem::RoutingError&) {
                return;
            }
        }
        qem::apply(decision, injections_, macros_);
    }

    EpisodeRecord finish() {
        record_.steps = state_.step_count;
        record_.t_agent = static_cast<double>(state_.step_count) * cfg_.step_seconds;
        record_.t_human = static_cast<double>(human_ms_) / 1000.0;
        record_.t_total = record_.t_agent + record_.t_human;
        return std::move(record_);
    }

    const TaskSpec& task_;
    const FrameworkConfig& cfg_;
    std::shared_ptr<const RuleSet> rules_;
    std::uint64_t world_seed_;
    craftworld::WorldState state_;
    planner::KnowledgeBase kb_;
    pim::FailureTracker tracker_;
    Performer performer_;
    std::unique_ptr<hfm::ExpertBackend> expert_;
    ScriptedExpert* scripted_ = nullptr;

    planner::Plan plan_;
    std::vector<planner::ContextInjection> injections_;
    std::deque<qem::MacroAction> macros_;
    std::optional<qem::MacroAction> active_;
    std::size_t macro_index_ = 0;
    craftworld::WorldState macro_start_;
    std::optional<Outcome> last_failure_;

    std::int64_t human_ms_ = 0;
    int help_calls_ = 0;
    EpisodeRecord record_;
};

}  // namespace

nlohmann::json EpisodeRecord::to_json() const {
    nlohmann::json triggers = nlohmann::json::array();
    for (const auto& t : trigger_events) triggers.push_back({{"step", t.step}, {"n_fail", t.n_fail}});
    nlohmann::json times = nlohmann::json::array();
    for (const auto& t : timings) {
        times.push_back({{"id", t.id}, {"t_review_start", t.t_review_start_ms}, {"t_submit", t.t_submit_ms}});
    }
    return {{"schema_version", kRecordSchemaVersion},
            {"task_id", task_id},
            {"seed", seed},
            {"gap_profile", gap_profile},
            {"success", success},
            {"steps", steps},
            {"t_agent", t_agent},
            {"t_human", t_human},
            {"t_total", t_total},
            {"queries", queries},
            {"transcripts", transcripts},
            {"trigger_events", triggers},
            {"timings", times},
            {"guidance", guidance}};
}

nlohmann::json FrameworkConfig::to_json() const {
    return {{"variant", std::string(harness::to_string(variant))},
            {"pim", pim.to_json()},
            {"step_seconds", step_seconds},
            {"review_seconds", review_seconds},
            {"log_noise", log_noise},
            {"performer",
             {{"vision_radius", performer.vision_radius},
              {"search_radius", performer.search_radius},
              {"search_growth", performer.search_growth}}},
            {"dialogue",
             {{"budget", dialogue.budget}, {"max_actions", dialogue.max_actions}, {"timeout_ms", dialogue.timeout.count()}}},
            {"policy", policy ? policy->to_json() : nlohmann::json()}};
}

EpisodeRecord run_episode(const TaskSpec& task, const FrameworkConfig& cfg, std::uint64_t seed,
                          const ExpertFactory& expert) {
    return Episode(task, cfg, seed, expert).run();
}

}  // namespace ahce::harness
