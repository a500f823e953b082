#pragma once

// Problem identification: sub-task timeouts, consecutive failure counting and
// the help trigger n_fail > n_max.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace ahce::pim {

struct PimConfig {
    // nullopt means unbounded autonomy: the trigger never fires.
    std::optional<int> n_max = 3;
    int s_max = 200;

    static PimConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    // Accepts an integer or "inf".
    static std::optional<int> parse_n_max(const std::string& text);
};

std::string format_n_max(std::optional<int> n_max);

class FailureTracker {
  public:
    explicit FailureTracker(PimConfig config = {});

    // Returns true when this observation timed out the current sub-task.
    bool observe_step(bool subtask_done);
    bool should_seek_help() const;

    int s_sub() const { return s_sub_; }
    int s_max() const { return config_.s_max; }
    int n_fail() const { return n_fail_; }
    std::optional<int> n_max() const { return config_.n_max; }

    // Sub-task finished outside of a step observation (e.g. already satisfied).
    void record_success();
    // Starts a fresh sub-task attempt without touching n_fail.
    void reset_step_count() { s_sub_ = 0; }

    bool operator==(const FailureTracker&) const = default;

  private:
    PimConfig config_;
    int s_sub_ = 0;
    int n_fail_ = 0;
};

bool should_seek_help(int n_fail, std::optional<int> n_max);

}  // namespace ahce::pim
