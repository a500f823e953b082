#pragma once

// Expert gateway: a TCP service speaking newline-delimited JSON with a live
// console. Episodes block on queries; the console acknowledges rendering and
// submits responses, correlated by query id.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include <json.hpp>

#include "ahce/hfm.hpp"

namespace ahce::harness {

std::int64_t now_ms();

class ExpertGateway {
  public:
    // Binds 127.0.0.1:port; port 0 picks a free one.
    explicit ExpertGateway(std::uint16_t port = 0);
    ~ExpertGateway();
    ExpertGateway(const ExpertGateway&) = delete;
    ExpertGateway& operator=(const ExpertGateway&) = delete;

    std::uint16_t port() const { return port_; }
    bool console_connected() const;
    std::size_t outstanding() const;

    // Blocks until the console answers or the timeout expires. Queries stay
    // outstanding across console disconnects and are replayed on reconnect.
    std::optional<hfm::ExpertResponse> ask(const hfm::Query& query, const nlohmann::json& context,
                                           std::chrono::milliseconds timeout);
    void publish_episode_update(const nlohmann::json& metrics);
    void stop();

  private:
    struct Pending {
        hfm::Query query;
        nlohmann::json context;
        std::optional<std::int64_t> t_review_start;
        std::optional<hfm::ExpertResponse> response;
    };

    void serve();
    void handle_line(const std::string& line);
    void send_line(int fd, const nlohmann::json& msg);
    void send_to_console(const nlohmann::json& msg);
    nlohmann::json query_message(const Pending& p) const;

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{true};
    std::thread io_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    int client_fd_ = -1;
    std::map<std::string, Pending> pending_;
    std::set<std::string> timed_out_;
    std::set<std::string> answered_;
    std::mutex send_mu_;
};

class GatewayExpert : public hfm::ExpertBackend {
  public:
    GatewayExpert(ExpertGateway& gateway, nlohmann::json context = {})
        : gateway_(gateway), context_(std::move(context)) {}
    std::optional<hfm::ExpertResponse> ask(const hfm::Query& query, std::chrono::milliseconds timeout) override {
        return gateway_.ask(query, context_, timeout);
    }
    void set_context(nlohmann::json context) { context_ = std::move(context); }

  private:
    ExpertGateway& gateway_;
    nlohmann::json context_;
};

}  // namespace ahce::harness
