#include <doctest.h>

#include <sstream>

#include "ahce/harness.hpp"

using namespace ahce;
using namespace ahce::harness;

namespace {

const RuleSet& rules() { return *RuleSet::defaults(); }

const std::vector<TaskSpec>& suite() {
    static const auto s = default_suite(rules());
    return s;
}

TaskSpec with_profile(const std::string& id, const std::string& profile) {
    auto t = find_task(suite(), id);
    t.gap_profile = profile;
    return t;
}

class SilentExpert : public hfm::ExpertBackend {
  public:
    std::optional<hfm::ExpertResponse> ask(const hfm::Query&, std::chrono::milliseconds) override { return std::nullopt; }
};

}  // namespace

TEST_CASE("suite has five tasks per level matching shortest-plan bands") {
    REQUIRE(suite().size() == 15);
    std::map<TaskLevel, int> per_level;
    for (const auto& t : suite()) {
        ++per_level[t.level];
        const auto len = craftworld::shortest_plan(t.target, craftworld::Inventory(rules().item_count()), rules()).size();
        CHECK(craftworld::level_for_plan_length(len) == t.level);
        CHECK(TaskSpec::from_json(t.to_json(rules()), rules()).id == t.id);
    }
    for (auto lvl : {TaskLevel::easy, TaskLevel::normal, TaskLevel::hard}) CHECK(per_level[lvl] == 5);
    CHECK_THROWS_AS(find_task(suite(), "craft_diamond"), craftworld::DomainError);
}

TEST_CASE("mixed profile alternates by seed parity") {
    const auto& t = find_task(suite(), "craft_stone_pickaxe");
    CHECK(resolve_profile(t, 2, rules()).name == "GAP-FACT");
    CHECK(resolve_profile(t, 3, rules()).name == "GAP-STRAT");
}

TEST_CASE("easy task under GAP-FACT succeeds without asking") {
    const auto rec = run_episode(with_profile("craft_plank", "GAP-FACT"), make_config(Variant::full), 1);
    CHECK(rec.success);
    CHECK(rec.queries == 0);
    CHECK(rec.t_human == 0.0);
}

TEST_CASE("hard GAP-FACT task without help runs out of budget") {
    const auto task = with_profile("craft_stone_pickaxe", "GAP-FACT");
    const auto rec = run_episode(task, make_config(Variant::full, std::nullopt), 1);
    CHECK_FALSE(rec.success);
    CHECK(rec.queries == 0);
    CHECK(rec.trigger_events.empty());
    CHECK(rec.steps == static_cast<std::uint64_t>(task.episode_step_budget));
    CHECK(rec.t_total == doctest::Approx(rec.t_agent));
}

TEST_CASE("hard GAP-FACT task with n_max = 3 asks once after the fourth failure") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CAPTURE(seed);
        const auto rec = run_episode(with_profile("craft_stone_pickaxe", "GAP-FACT"), make_config(Variant::full), seed);
        CHECK(rec.success);
        REQUIRE(rec.trigger_events.size() == 1);
        CHECK(rec.trigger_events[0].n_fail == 4);
        CHECK(rec.queries == 1);
        REQUIRE(rec.guidance.size() == 1);
        CHECK(rec.guidance[0].find("wooden pickaxe") != std::string::npos);
        REQUIRE(rec.transcripts.size() == 1);
        const auto parsed = hfm::parse_transcript(rec.transcripts[0]);
        REQUIRE(std::holds_alternative<hfm::DialogueTranscript>(parsed));
        CHECK(std::get<hfm::DialogueTranscript>(parsed).count(hfm::SegmentKind::Search) == 1);
    }
}

TEST_CASE("routed guidance unblocks the failing sub-task within its step budget") {
    const auto cfg = make_config(Variant::full);
    for (const char* profile : {"GAP-FACT", "GAP-STRAT"}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            CAPTURE(profile);
            CAPTURE(seed);
            const auto rec = run_episode(with_profile("craft_stone_pickaxe", profile), cfg, seed);
            REQUIRE(rec.success);
            REQUIRE(rec.trigger_events.size() == 1);
            CHECK(rec.steps - rec.trigger_events[0].step <= static_cast<std::uint64_t>(cfg.pim.s_max));
        }
    }
}

TEST_CASE("human time equals the sum of review intervals") {
    for (auto v : {Variant::log, Variant::full}) {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto rec = run_episode(find_task(suite(), "craft_furnace"), make_config(v, 1), seed);
            double sum = 0;
            for (const auto& t : rec.timings) {
                CHECK(t.t_submit_ms >= t.t_review_start_ms);
                sum += static_cast<double>(t.t_submit_ms - t.t_review_start_ms) / 1000.0;
            }
            CHECK(rec.t_human == doctest::Approx(sum));
            CHECK(rec.t_total == doctest::Approx(rec.t_agent + rec.t_human));
            CHECK(static_cast<int>(rec.timings.size()) == rec.queries);
        }
    }
}

TEST_CASE("episodes are reproducible from their seed") {
    const auto& task = find_task(suite(), "craft_stone_sword");
    for (auto v : {Variant::baseline, Variant::log, Variant::full}) {
        const auto a = run_episode(task, make_config(v), 9);
        const auto b = run_episode(task, make_config(v), 9);
        CHECK(a == b);
        CHECK(a.to_json() == b.to_json());
    }
}

TEST_CASE("unbounded n_max matches the baseline") {
    for (const auto& task : suite()) {
        if (task.level != TaskLevel::hard) continue;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto full = run_episode(task, make_config(Variant::full, std::nullopt), seed);
            const auto base = run_episode(task, make_config(Variant::baseline), seed);
            CHECK(full.success == base.success);
            CHECK(full.steps == base.steps);
            CHECK(full.queries == 0);
            CHECK(full.t_total == base.t_total);
        }
    }
}

TEST_CASE("unanswered queries leave the episode running") {
    auto cfg = make_config(Variant::full);
    const auto rec = run_episode(with_profile("craft_stone_pickaxe", "GAP-FACT"), cfg, 1,
                                 [](const TaskSpec&, std::uint64_t) { return std::make_unique<SilentExpert>(); });
    CHECK_FALSE(rec.success);
    CHECK(rec.queries >= 1);
    CHECK(rec.t_human == 0.0);
    REQUIRE_FALSE(rec.transcripts.empty());
    CHECK(rec.transcripts[0].find(hfm::kNoResponse) != std::string::npos);
}

TEST_CASE("scripted expert answers structured questions") {
    ScriptedExpert e(RuleSet::defaults(), 15.0);
    CHECK(e.answer("what tool do I need to mine stone?") == "stone can only be mined with a wooden pickaxe");
    CHECK(e.answer("what tool do I need to mine iron ore?") == "iron ore can only be mined with a stone pickaxe");
    CHECK(e.answer("where can I find stone?") == "dig down to find stone");
    CHECK(e.answer("where can I find log in the desert?") == "get out of the desert to find log");
    CHECK(e.answer("where can I find log in the forest?") == "search a wider area for log");
    CHECK(e.answer("what is the meaning of life?") == hfm::kUnknown);
    e.set_clock(1000);
    const auto r = e.ask({"h1-1", "where can I find stone?", ""}, {});
    REQUIRE(r);
    CHECK(r->query_id == "h1-1");
    CHECK(r->t_review_start_ms == 1000);
    CHECK(r->t_submit_ms == 16000);
}

TEST_CASE("failure log carries the impasse and noise-free replies are exact") {
    Impasse imp;
    imp.task_id = "craft_stone_pickaxe";
    imp.subtask.kind = craftworld::SubTaskKind::gather;
    imp.subtask.item = rules().id("cobblestone");
    imp.subtask.source = rules().id("stone");
    imp.failure.reason = craftworld::Reason::tool_tier_insufficient;
    imp.n_fail = 4;
    imp.biome = craftworld::Biome::plains;
    const auto log = failure_log(imp, rules());
    CHECK(log.rfind("failure log", 0) == 0);
    CHECK(log.find("failures: 4") != std::string::npos);
    ScriptedExpert e(RuleSet::defaults(), 15.0, 0.0);
    CHECK(e.reply_to_log(log) == "stone can only be mined with a wooden pickaxe");
}

TEST_CASE("impasse dialogue asks the question matching the failure") {
    Impasse imp;
    imp.subtask.kind = craftworld::SubTaskKind::gather;
    imp.subtask.item = rules().id("log");
    imp.subtask.source = rules().id("log");
    imp.failure.reason = craftworld::Reason::resource_absent;
    imp.biome = craftworld::Biome::desert;
    const ImpasseTask task(imp, rules());
    const auto b = task.initial_belief();
    CHECK(b.slots == 1);
    CHECK(task.query_for(b) == "where can I find log in the desert?");
    ScriptedExpert e(RuleSet::defaults(), 15.0);
    const auto out = hfm::run_dialogue(*default_policy(), e, task, {});
    CHECK(out.searches == 1);
    CHECK(out.plan.text == "get out of the desert to find log");
    const auto report = hfm::validate_answer(out.plan, rules());
    CHECK(report.ok());
    REQUIRE(report.decision.macros.size() == 1);
    CHECK(report.decision.macros[0].kind == qem::MacroKind::escape_biome);
}

TEST_CASE("performer gathers logs in a forest") {
    craftworld::WorldConfig wc;
    wc.spawn_biome = craftworld::Biome::forest;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto state = craftworld::spawn_world(seed, wc, rules());
        craftworld::SubTask t;
        t.kind = craftworld::SubTaskKind::gather;
        t.item = rules().id("log");
        t.source = rules().id("log");
        t.target_count = 1;
        Performer p(rules(), {}, seed);
        p.begin(t, state);
        int steps = 0;
        while (state.inventory.count(t.item) < 1 && steps < 200) {
            craftworld::apply_action(state, p.next(state), rules());
            ++steps;
        }
        CHECK(state.inventory.count(t.item) >= 1);
    }
}

TEST_CASE("ratio arithmetic") {
    CHECK(ratio_percent(79.4, 1265.6) == doctest::Approx(6.3));
    CHECK(ratio_percent(310.1, 1513.7) == doctest::Approx(20.5));
    CHECK(format_ratio(79.4, 1265.6) == "6.3");
    CHECK(format_ratio(0, 0) == "0.0");
    std::vector<EpisodeRecord> recs(2);
    recs[0].success = true;
    recs[0].t_human = 10;
    recs[0].t_total = 100;
    recs[1].t_human = 0;
    recs[1].t_total = 300;
    recs[1].queries = 2;
    const auto m = summarize(recs);
    CHECK(m.success_rate == doctest::Approx(50.0));
    CHECK(m.human_time_s == doctest::Approx(5.0));
    CHECK(m.total_time_s == doctest::Approx(200.0));
    CHECK(m.human_ratio == doctest::Approx(2.5));
    CHECK(m.mean_queries == doctest::Approx(1.0));
}

TEST_CASE("suite metrics and sweep tables") {
    std::vector<TaskSpec> tasks{find_task(suite(), "craft_plank"), find_task(suite(), "craft_stone_pickaxe")};
    const auto res = run_suite(tasks, 2, {{"baseline", make_config(Variant::baseline)}, {"full", make_config(Variant::full)}}, 2);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.records.at("full").size() == 4);
    std::ostringstream csv;
    write_metrics_csv(csv, res.rows);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    CHECK(header ==
          "method,easy_success_rate,easy_human_time_s,easy_total_time_s,easy_human_ratio,"
          "medium_success_rate,medium_human_time_s,medium_total_time_s,medium_human_ratio,"
          "hard_success_rate,hard_human_time_s,hard_total_time_s,hard_human_ratio");
    std::getline(lines, row);
    CHECK(row.rfind("baseline,", 0) == 0);

    const auto sweep = ablation_sweep(find_task(suite(), "craft_stone_pickaxe"), {1, std::nullopt}, 2,
                                      make_config(Variant::full), 2);
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[1].mean_queries == 0.0);
    std::ostringstream sc;
    write_sweep_csv(sc, sweep);
    CHECK(sc.str().rfind("n_max,success_rate,human_ratio,total_time_mean,total_time_var,human_time_mean,mean_queries\n", 0) == 0);
    CHECK(sc.str().find("\ninf,") != std::string::npos);
}

TEST_CASE("parallel runs match serial runs") {
    std::vector<std::function<EpisodeRecord()>> jobs;
    const auto& task = find_task(suite(), "craft_torch");
    for (std::uint64_t s = 1; s <= 4; ++s) jobs.push_back([&task, s] { return run_episode(task, make_config(Variant::full), s); });
    const auto par = run_parallel(jobs, 3);
    for (std::uint64_t s = 1; s <= 4; ++s) CHECK(par[s - 1] == run_episode(task, make_config(Variant::full), s));
}
