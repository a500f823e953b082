#include "ahce/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace ahce::harness {

double ratio_percent(double t_human, double t_total) {
    if (t_total <= 0) return 0.0;
    return std::round(1000.0 * t_human / t_total) / 10.0;
}

std::string format_ratio(double t_human, double t_total) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", ratio_percent(t_human, t_total));
    return buf;
}

LevelMetrics summarize(const std::vector<EpisodeRecord>& records) {
    LevelMetrics m;
    m.episodes = static_cast<int>(records.size());
    if (records.empty()) return m;
    double successes = 0, human = 0, total = 0, queries = 0;
    for (const auto& r : records) {
        successes += r.success ? 1 : 0;
        human += r.t_human;
        total += r.t_total;
        queries += r.queries;
    }
    const double n = static_cast<double>(records.size());
    m.success_rate = 100.0 * successes / n;
    m.human_time_s = human / n;
    m.total_time_s = total / n;
    m.human_ratio = ratio_percent(m.human_time_s, m.total_time_s);
    m.mean_queries = queries / n;
    return m;
}

std::vector<EpisodeRecord> run_parallel(const std::vector<std::function<EpisodeRecord()>>& jobs, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, std::max<std::size_t>(1, jobs.size()));
    std::vector<EpisodeRecord> out(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (auto i = next++; i < jobs.size(); i = next++) {
            try {
                out[i] = jobs[i]();
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

SuiteResult run_suite(const std::vector<TaskSpec>& tasks, int trials, const std::vector<VariantSpec>& variants,
                      unsigned threads) {
    if (trials < 1) throw craftworld::ConfigError("trials must be positive");
    SuiteResult result;
    for (const auto& v : variants) {
        std::vector<std::function<EpisodeRecord()>> jobs;
        for (const auto& task : tasks) {
            for (int s = 1; s <= trials; ++s) {
                jobs.push_back([&task, &v, s] { return run_episode(task, v.config, static_cast<std::uint64_t>(s)); });
            }
        }
        auto records = run_parallel(jobs, threads);
        MetricsRow row{v.name, {}};
        std::map<TaskLevel, std::vector<EpisodeRecord>> by_level;
        for (std::size_t i = 0; i < records.size(); ++i) by_level[tasks[i / trials].level].push_back(records[i]);
        for (const auto& [level, recs] : by_level) row.levels[level] = summarize(recs);
        result.rows.push_back(std::move(row));
        result.records[v.name] = std::move(records);
    }
    return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    const std::pair<TaskLevel, const char*> levels[] = {
        {TaskLevel::easy, "easy"}, {TaskLevel::normal, "medium"}, {TaskLevel::hard, "hard"}};
    out << "method";
    for (const auto& [level, name] : levels) {
        out << ',' << name << "_success_rate," << name << "_human_time_s," << name << "_total_time_s," << name
            << "_human_ratio";
    }
    out << '\n';
    char buf[64];
    for (const auto& row : rows) {
        out << row.method;
        for (const auto& [level, name] : levels) {
            auto it = row.levels.find(level);
            if (it == row.levels.end()) {
                out << ",,,,";
                continue;
            }
            const auto& m = it->second;
            std::snprintf(buf, sizeof buf, ",%.1f,%.1f,%.1f,", m.success_rate, m.human_time_s, m.total_time_s);
            out << buf << format_ratio(m.human_time_s, m.total_time_s);
        }
        out << '\n';
    }
}

std::vector<SweepRow> ablation_sweep(const TaskSpec& task, const std::vector<std::optional<int>>& n_max_values,
                                     int trials, const FrameworkConfig& base, unsigned threads) {
    if (trials < 1) throw craftworld::ConfigError("trials must be positive");
    std::vector<SweepRow> rows;
    for (const auto& n_max : n_max_values) {
        FrameworkConfig cfg = base;
        cfg.pim.n_max = n_max;
        std::vector<std::function<EpisodeRecord()>> jobs;
        for (int s = 1; s <= trials; ++s) {
            jobs.push_back([&task, &cfg, s] { return run_episode(task, cfg, static_cast<std::uint64_t>(s)); });
        }
        SweepRow row;
        row.n_max = n_max;
        row.records = run_parallel(jobs, threads);
        const auto m = summarize(row.records);
        row.success_rate = m.success_rate;
        row.human_ratio = m.human_ratio;
        row.total_time_mean = m.total_time_s;
        row.human_time_mean = m.human_time_s;
        row.mean_queries = m.mean_queries;
        double var = 0;
        for (const auto& r : row.records) var += (r.t_total - m.total_time_s) * (r.t_total - m.total_time_s);
        row.total_time_var = var / static_cast<double>(row.records.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "n_max,success_rate,human_ratio,total_time_mean,total_time_var,human_time_mean,mean_queries\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.1f,%.1f,%.2f,%.2f,%.2f,%.3f\n", pim::format_n_max(r.n_max).c_str(),
                      r.success_rate, r.human_ratio, r.total_time_mean, r.total_time_var, r.human_time_mean,
                      r.mean_queries);
        out << buf;
    }
}

std::shared_ptr<const hfm::DialoguePolicy> default_policy() {
    static std::mutex mu;
    static std::shared_ptr<const hfm::DialoguePolicy> cached;
    std::lock_guard lock(mu);
    if (cached) return cached;
    const auto path = data_dir() / "hfm_policy.json";
    if (std::ifstream in(path); in) {
        cached = std::make_shared<hfm::DialoguePolicy>(grpo::load_checkpoint(nlohmann::json::parse(in)));
        return cached;
    }
    grpo::TrainerConfig tc;
    tc.target_accuracy = 0.95;
    cached = std::make_shared<hfm::DialoguePolicy>(grpo::train(tc).policy);
    return cached;
}

FrameworkConfig make_config(Variant v, std::optional<int> n_max) {
    FrameworkConfig cfg;
    cfg.variant = v;
    cfg.pim.n_max = n_max;
    if (v == Variant::full) cfg.policy = default_policy();
    return cfg;
}

}  // namespace ahce::harness
