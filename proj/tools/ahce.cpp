// Command-line front end: single episodes, suites, n_max sweeps, dialogue
// policy training and the live expert gateway.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ahce/gateway.hpp"
#include "ahce/harness.hpp"

namespace {

using namespace ahce;

std::atomic<bool> interrupted{false};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, sep);) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw craftworld::ConfigError("cannot write " + path);
    out << text;
}

std::vector<harness::TaskSpec> suite_from(const std::string& path, const craftworld::RuleSet& rules) {
    return path.empty() ? harness::default_suite(rules) : harness::load_suite(path, rules);
}

harness::ExpertFactory live_factory(harness::ExpertGateway& gateway) {
    return [&gateway](const harness::TaskSpec& task, std::uint64_t seed) -> std::unique_ptr<hfm::ExpertBackend> {
        return std::make_unique<harness::GatewayExpert>(gateway,
                                                        nlohmann::json{{"task", task.id}, {"seed", seed}});
    };
}

void publish(harness::ExpertGateway& gateway, const harness::EpisodeRecord& r) {
    gateway.publish_episode_update({{"task", r.task_id},
                                    {"seed", r.seed},
                                    {"success", r.success},
                                    {"t_human", r.t_human},
                                    {"t_total", r.t_total},
                                    {"human_ratio", harness::ratio_percent(r.t_human, r.t_total)},
                                    {"queries", r.queries}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive human-in-the-loop crafting agent"};
    app.require_subcommand(1);
    std::string suite_path;
    unsigned threads = 0;
    app.add_option("--suite", suite_path, "Task suite JSON (default: built-in 15 tasks)");
    app.add_option("--threads", threads, "Worker threads (0 = hardware)");

    auto* run = app.add_subcommand("run", "Run one episode");
    std::string task_id = "craft_stone_pickaxe", n_max_text = "3", expert_kind = "scripted", variant_name = "full",
                out_path, profile;
    int s_max = 200, timeout_ms = 0;
    std::uint64_t seed = 1;
    std::uint16_t port = 0;
    run->add_option("--task", task_id, "Task id");
    run->add_option("--n-max", n_max_text, "Consecutive failures tolerated before asking (integer or inf)");
    run->add_option("--s-max", s_max, "Step budget per sub-task attempt")->check(CLI::PositiveNumber);
    run->add_option("--expert", expert_kind, "Expert backend")->check(CLI::IsMember({"scripted", "live"}));
    run->add_option("--variant", variant_name, "baseline, log or full");
    run->add_option("--profile", profile, "Gap profile override: FULL, GAP-FACT, GAP-STRAT or MIXED");
    run->add_option("--seed", seed, "Episode seed");
    run->add_option("--port", port, "Gateway port for --expert live");
    run->add_option("--timeout-ms", timeout_ms, "Per-query timeout for live experts (0 waits forever)");
    run->add_option("--out", out_path, "EpisodeRecord JSON output (default stdout)");

    auto* suite = app.add_subcommand("suite", "Run every task for each variant and write the metrics table");
    std::string variants_text = "baseline,log,full", metrics_out = "metrics.csv", records_out;
    int trials = 50;
    suite->add_option("--variants", variants_text, "Comma-separated variants");
    suite->add_option("--trials", trials, "Seeds per task")->check(CLI::PositiveNumber);
    suite->add_option("--n-max", n_max_text, "n_max for the help-seeking variants");
    suite->add_option("--out", metrics_out, "Metrics CSV");
    suite->add_option("--records", records_out, "Optional JSONL of every EpisodeRecord");

    auto* sweep = app.add_subcommand("sweep", "Ablation sweep over n_max");
    std::string param = "n-max", values_text = "1,2,3,5,8,inf", sweep_out;
    sweep->add_option("--param", param, "Swept parameter")->check(CLI::IsMember({"n-max"}));
    sweep->add_option("--values", values_text, "Comma-separated values");
    sweep->add_option("--task", task_id, "Task id");
    sweep->add_option("--trials", trials, "Seeds per value")->check(CLI::PositiveNumber);
    sweep->add_option("--variant", variant_name, "Variant swept");
    sweep->add_option("--out", sweep_out, "Sweep CSV (default stdout)");

    auto* train = app.add_subcommand("train-hfm", "Train the dialogue policy on multi-hop QA with GRPO");
    grpo::TrainerConfig tc;
    std::string policy_out = (harness::data_dir() / "hfm_policy.json").string(), curve_out;
    train->add_option("--group-size", tc.group_size, "Rollouts per group");
    train->add_option("--epsilon", tc.epsilon, "Clip range");
    train->add_option("--beta", tc.beta, "KL penalty weight");
    train->add_option("--updates", tc.updates, "Policy updates");
    train->add_option("--lr", tc.learning_rate, "Learning rate");
    train->add_option("--seed", tc.seed, "Training seed");
    train->add_option("--target-accuracy", tc.target_accuracy, "Stop once held-out accuracy reaches this");
    train->add_option("--out", policy_out, "Checkpoint JSON");
    train->add_option("--curve", curve_out, "Training curve CSV");

    auto* serve = app.add_subcommand("serve", "Start the expert gateway and run episodes answered live");
    int episodes = 1;
    serve->add_option("--port", port, "Listen port");
    serve->add_option("--task", task_id, "Task id");
    serve->add_option("--episodes", episodes, "Episodes to run (0 serves until interrupted)");
    serve->add_option("--n-max", n_max_text, "n_max");
    serve->add_option("--timeout-ms", timeout_ms, "Per-query timeout (0 waits forever)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto rules = craftworld::RuleSet::defaults();
        const auto tasks = suite_from(suite_path, *rules);
        const auto n_max = pim::PimConfig::parse_n_max(n_max_text);

        if (*run) {
            auto task = harness::find_task(tasks, task_id);
            if (!profile.empty()) task.gap_profile = profile;
            auto cfg = harness::make_config(harness::variant_from_string(variant_name), n_max);
            cfg.pim.s_max = s_max;
            cfg.dialogue.timeout = std::chrono::milliseconds(timeout_ms);
            harness::EpisodeRecord record;
            if (expert_kind == "live") {
                harness::ExpertGateway gateway(port);
                std::cerr << "gateway listening on 127.0.0.1:" << gateway.port() << "\n";
                record = harness::run_episode(task, cfg, seed, live_factory(gateway));
                publish(gateway, record);
            } else {
                record = harness::run_episode(task, cfg, seed);
            }
            write_or_print(out_path, record.to_json().dump(2) + "\n");
        } else if (*suite) {
            std::vector<harness::VariantSpec> variants;
            for (const auto& name : split(variants_text, ',')) {
                const auto v = harness::variant_from_string(name);
                variants.push_back({name, harness::make_config(v, v == harness::Variant::baseline ? std::nullopt : n_max)});
            }
            const auto result = harness::run_suite(tasks, trials, variants, threads);
            std::ostringstream csv;
            harness::write_metrics_csv(csv, result.rows);
            write_or_print(metrics_out, csv.str());
            if (!records_out.empty()) {
                std::ostringstream jsonl;
                for (const auto& [method, recs] : result.records) {
                    for (const auto& r : recs) {
                        auto j = r.to_json();
                        j["method"] = method;
                        jsonl << j.dump() << "\n";
                    }
                }
                write_or_print(records_out, jsonl.str());
            }
            if (metrics_out != "-" && !metrics_out.empty()) std::cout << csv.str();
        } else if (*sweep) {
            std::vector<std::optional<int>> values;
            for (const auto& v : split(values_text, ',')) values.push_back(pim::PimConfig::parse_n_max(v));
            const auto& task = harness::find_task(tasks, task_id);
            const auto base = harness::make_config(harness::variant_from_string(variant_name));
            const auto rows = harness::ablation_sweep(task, values, trials, base, threads);
            std::ostringstream csv;
            harness::write_sweep_csv(csv, rows);
            write_or_print(sweep_out, csv.str());
        } else if (*train) {
            tc.validate();
            const auto result = grpo::train(tc);
            if (result.diverged) std::cerr << "training diverged; keeping last finite policy\n";
            write_or_print(policy_out, grpo::checkpoint(result.policy, tc).dump(2) + "\n");
            if (!curve_out.empty()) {
                std::ofstream curve(curve_out);
                grpo::write_curve_csv(curve, result.curve);
            }
            const auto eval = grpo::evaluate_greedy(
                result.policy, grpo::heldout_set(tc.heldout_seed, tc.heldout_tasks, tc.hops_min, tc.hops_max),
                tc.dialogue);
            std::cerr << "updates " << result.updates_run << ", held-out accuracy " << eval.accuracy
                      << ", mean queries " << eval.mean_queries << " (mean hops " << eval.mean_hops << ")\n";
        } else if (*serve) {
            harness::ExpertGateway gateway(port);
            std::cerr << "gateway listening on 127.0.0.1:" << gateway.port() << "\n";
            std::signal(SIGINT, [](int) { interrupted = true; });
            std::signal(SIGTERM, [](int) { interrupted = true; });
            const auto& task = harness::find_task(tasks, task_id);
            auto cfg = harness::make_config(harness::Variant::full, n_max);
            cfg.dialogue.timeout = std::chrono::milliseconds(timeout_ms);
            for (int e = 1; episodes == 0 || e <= episodes; ++e) {
                if (interrupted) break;
                const auto record = harness::run_episode(task, cfg, static_cast<std::uint64_t>(e), live_factory(gateway));
                publish(gateway, record);
                std::cout << record.to_json().dump() << std::endl;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
