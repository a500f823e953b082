#include "ahce/gateway.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace ahce::harness {

using nlohmann::json;

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

ExpertGateway::ExpertGateway(std::uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 4) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw std::runtime_error("gateway bind: " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    io_ = std::thread([this] { serve(); });
}

ExpertGateway::~ExpertGateway() { stop(); }

void ExpertGateway::stop() {
    if (!running_.exchange(false)) return;
    if (io_.joinable()) io_.join();
    std::lock_guard lock(mu_);
    if (client_fd_ >= 0) ::close(client_fd_);
    client_fd_ = -1;
    ::close(listen_fd_);
    cv_.notify_all();
}

bool ExpertGateway::console_connected() const {
    std::lock_guard lock(mu_);
    return client_fd_ >= 0;
}

std::size_t ExpertGateway::outstanding() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [id, p] : pending_) n += p.response ? 0 : 1;
    return n;
}

json ExpertGateway::query_message(const Pending& p) const {
    return {{"type", "query"}, {"id", p.query.id}, {"question", p.query.text}, {"context", p.context}};
}

void ExpertGateway::send_line(int fd, const json& msg) {
    const std::string line = msg.dump() + "\n";
    std::lock_guard lock(send_mu_);
    std::size_t off = 0;
    while (off < line.size()) {
        const auto n = ::send(fd, line.data() + off, line.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return;
        off += static_cast<std::size_t>(n);
    }
}

void ExpertGateway::send_to_console(const json& msg) {
    int fd;
    {
        std::lock_guard lock(mu_);
        fd = client_fd_;
    }
    if (fd >= 0) send_line(fd, msg);
}

std::optional<hfm::ExpertResponse> ExpertGateway::ask(const hfm::Query& query, const json& context,
                                                      std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (pending_.count(query.id) || answered_.count(query.id) || timed_out_.count(query.id))
        throw std::invalid_argument("duplicate query id: " + query.id);
    auto& p = pending_[query.id];
    p.query = query;
    p.context = context.is_object() ? context : json::object();
    if (!p.context.contains("transcript")) p.context["transcript"] = query.context_snapshot;
    const auto msg = query_message(p);
    const int fd = client_fd_;
    lock.unlock();
    if (fd >= 0) send_line(fd, msg);
    lock.lock();

    const auto ready = [&] { return pending_.at(query.id).response.has_value() || !running_; };
    if (timeout.count() > 0) {
        cv_.wait_for(lock, timeout, ready);
    } else {
        cv_.wait(lock, ready);
    }
    auto node = pending_.extract(query.id);
    if (node.mapped().response) {
        answered_.insert(query.id);
        return node.mapped().response;
    }
    timed_out_.insert(query.id);
    return std::nullopt;
}

void ExpertGateway::publish_episode_update(const json& metrics) {
    json msg = {{"type", "episode_update"}};
    for (auto it = metrics.begin(); it != metrics.end(); ++it) msg[it.key()] = it.value();
    send_to_console(msg);
}

void ExpertGateway::handle_line(const std::string& line) {
    json msg;
    try {
        msg = json::parse(line);
    } catch (const json::exception&) {
        send_to_console({{"type", "error"}, {"id", nullptr}, {"error", "bad_message"}});
        return;
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string() || !msg.contains("id") ||
        !msg["id"].is_string()) {
        send_to_console({{"type", "error"}, {"id", nullptr}, {"error", "bad_message"}});
        return;
    }
    const auto type = msg["type"].get<std::string>();
    const auto id = msg["id"].get<std::string>();
    const auto stamp = now_ms();
    std::string error;
    {
        std::lock_guard lock(mu_);
        auto it = pending_.find(id);
        if (type == "ack_render") {
            if (it == pending_.end() || it->second.response) {
                error = answered_.count(id) ? "already_answered" : "already_timed_out";
            } else if (!it->second.t_review_start) {
                it->second.t_review_start = stamp;
            }
        } else if (type == "response") {
            const auto text = msg.value("text", std::string());
            if (answered_.count(id) || (it != pending_.end() && it->second.response)) {
                error = "already_answered";
            } else if (it == pending_.end()) {
                error = "already_timed_out";
            } else if (text.empty()) {
                error = "empty_response";
            } else {
                auto& p = it->second;
                hfm::ExpertResponse r;
                r.query_id = id;
                r.text = text;
                r.t_review_start_ms = p.t_review_start.value_or(stamp);
                r.t_submit_ms = stamp;
                p.response = r;
                cv_.notify_all();
            }
        } else {
            error = "bad_message";
        }
    }
    if (!error.empty()) send_to_console({{"type", "error"}, {"id", id}, {"error", error}});
}

void ExpertGateway::serve() {
    std::string buffer;
    while (running_) {
        int client;
        {
            std::lock_guard lock(mu_);
            client = client_fd_;
        }
        pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {client, POLLIN, 0}};
        const int n = ::poll(fds, client >= 0 ? 2 : 1, 50);
        if (n <= 0) continue;
        if (fds[0].revents & POLLIN) {
            const int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd >= 0) {
                std::vector<json> replay;
                {
                    std::lock_guard lock(mu_);
                    if (client_fd_ >= 0) ::close(client_fd_);
                    client_fd_ = fd;
                    for (const auto& [id, p] : pending_) {
                        if (!p.response) replay.push_back(query_message(p));
                    }
                }
                buffer.clear();
                for (const auto& m : replay) send_line(fd, m);
                continue;
            }
        }
        if (client >= 0 && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
            char chunk[4096];
            const auto got = ::recv(client, chunk, sizeof chunk, 0);
            if (got <= 0) {
                std::lock_guard lock(mu_);
                if (client_fd_ == client) {
                    ::close(client_fd_);
                    client_fd_ = -1;
                }
                buffer.clear();
                continue;
            }
            buffer.append(chunk, static_cast<std::size_t>(got));
            for (auto pos = buffer.find('\n'); pos != std::string::npos; pos = buffer.find('\n')) {
                const auto line = buffer.substr(0, pos);
                buffer.erase(0, pos + 1);
                if (!line.empty()) handle_line(line);
            }
        }
    }
}

}  // namespace ahce::harness
