#include "ahce/pim.hpp"

#include <stdexcept>

namespace ahce::pim {

bool should_seek_help(int n_fail, std::optional<int> n_max) { return n_max && n_fail > *n_max; }

std::optional<int> PimConfig::parse_n_max(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "∞") return std::nullopt;
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("n_max must be a non-negative integer or 'inf': " + text);
    }
    if (used != text.size() || v < 0) throw std::invalid_argument("n_max must be a non-negative integer or 'inf': " + text);
    return v;
}

std::string format_n_max(std::optional<int> n_max) { return n_max ? std::to_string(*n_max) : "inf"; }

PimConfig PimConfig::from_json(const nlohmann::json& doc) {
    PimConfig c;
    if (doc.contains("n_max")) {
        const auto& v = doc.at("n_max");
        c.n_max = v.is_string() ? parse_n_max(v.get<std::string>()) : std::optional<int>(v.get<int>());
    }
    c.s_max = doc.value("s_max", c.s_max);
    if (c.s_max < 1) throw std::invalid_argument("s_max must be positive");
    return c;
}

nlohmann::json PimConfig::to_json() const {
    nlohmann::json j;
    j["n_max"] = n_max ? nlohmann::json(*n_max) : nlohmann::json("inf");
    j["s_max"] = s_max;
    return j;
}

FailureTracker::FailureTracker(PimConfig config) : config_(config) {
    if (config_.s_max < 1) throw std::invalid_argument("s_max must be positive");
    if (config_.n_max && *config_.n_max < 0) throw std::invalid_argument("n_max must be non-negative");
}

bool FailureTracker::observe_step(bool subtask_done) {
    ++s_sub_;
    if (subtask_done) {
        record_success();
        return false;
    }
    if (s_sub_ > config_.s_max) {
        ++n_fail_;
        s_sub_ = 0;
        return true;
    }
    return false;
}

bool FailureTracker::should_seek_help() const { return pim::should_seek_help(n_fail_, config_.n_max); }

void FailureTracker::record_success() {
    s_sub_ = 0;
    n_fail_ = 0;
}

}  // namespace ahce::pim
