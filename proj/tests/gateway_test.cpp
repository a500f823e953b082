#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>

#include "ahce/gateway.hpp"

using namespace ahce;
using namespace ahce::harness;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

// Minimal console speaking the line protocol over loopback.
class Console {
  public:
    explicit Console(std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    }
    ~Console() { close(); }

    void close() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

    void send(const json& msg) {
        const auto line = msg.dump() + "\n";
        REQUIRE(::send(fd_, line.data(), line.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(line.size()));
    }

    void send_raw(const std::string& line) { REQUIRE(::send(fd_, line.data(), line.size(), MSG_NOSIGNAL) > 0); }

    std::optional<json> read(std::chrono::milliseconds timeout = 2000ms) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (auto pos = buf_.find('\n'); pos != std::string::npos) {
                auto line = buf_.substr(0, pos);
                buf_.erase(0, pos + 1);
                return json::parse(line);
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) return std::nullopt;
            pollfd p{fd_, POLLIN, 0};
            if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) return std::nullopt;
            char chunk[4096];
            const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) return std::nullopt;
            buf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    json read_type(const std::string& type) {
        for (;;) {
            auto m = read();
            REQUIRE(m);
            if ((*m)["type"] == type) return *m;
        }
    }

  private:
    int fd_ = -1;
    std::string buf_;
};

void wait_connected(const ExpertGateway& gw) {
    for (int i = 0; i < 200 && !gw.console_connected(); ++i) std::this_thread::sleep_for(5ms);
    REQUIRE(gw.console_connected());
}

hfm::Query query(const std::string& id, const std::string& text) { return {id, text, "<think>x</think>"}; }

}  // namespace

TEST_CASE("a console answer reaches the asking episode with id and timing") {
    ExpertGateway gw;
    Console c(gw.port());
    wait_connected(gw);
    auto fut = std::async(std::launch::async, [&] {
        return gw.ask(query("h1-1", "what tool do I need to mine stone?"), {{"task", "craft_stone_pickaxe"}}, 5000ms);
    });
    const auto q = c.read_type("query");
    CHECK(q["id"] == "h1-1");
    CHECK(q["question"] == "what tool do I need to mine stone?");
    CHECK(q["context"]["task"] == "craft_stone_pickaxe");
    CHECK(q["context"]["transcript"] == "<think>x</think>");
    c.send({{"type", "ack_render"}, {"id", "h1-1"}});
    std::this_thread::sleep_for(20ms);
    c.send({{"type", "response"}, {"id", "h1-1"}, {"text", "use a wooden pickaxe"}});
    const auto r = fut.get();
    REQUIRE(r);
    CHECK(r->query_id == "h1-1");
    CHECK(r->text == "use a wooden pickaxe");
    CHECK(r->t_submit_ms >= r->t_review_start_ms + 15);
    CHECK(gw.outstanding() == 0);
}

TEST_CASE("interleaved queries are correlated by id") {
    ExpertGateway gw;
    Console c(gw.port());
    wait_connected(gw);
    auto a = std::async(std::launch::async, [&] { return gw.ask(query("a-1", "first"), {}, 5000ms); });
    auto b = std::async(std::launch::async, [&] { return gw.ask(query("b-1", "second"), {}, 5000ms); });
    std::map<std::string, std::string> seen;
    for (int i = 0; i < 2; ++i) {
        const auto q = c.read_type("query");
        seen[q["id"]] = q["question"];
    }
    CHECK(seen == std::map<std::string, std::string>{{"a-1", "first"}, {"b-1", "second"}});
    c.send({{"type", "response"}, {"id", "b-1"}, {"text", "answer b"}});
    c.send({{"type", "response"}, {"id", "a-1"}, {"text", "answer a"}});
    CHECK(a.get()->text == "answer a");
    CHECK(b.get()->text == "answer b");
}

TEST_CASE("a missing console times out into a no-response result") {
    ExpertGateway gw;
    GatewayExpert expert(gw);
    hfm::DialogueConfig cfg;
    cfg.budget = 1;
    cfg.timeout = 100ms;
    std::vector<double> theta(hfm::DialoguePolicy::dimension(), 0.0);
    theta[1 * hfm::kFeatures + 1] = 5.0;
    theta[2 * hfm::kFeatures + 0] = 1.0;

    class OneSlot : public hfm::DialogueTask {
      public:
        std::string prompt() const override { return "p"; }
        hfm::Belief initial_belief() const override { return {0, 1, "", {}, false}; }
        std::string query_for(const hfm::Belief&) const override { return "where?"; }
        void absorb(hfm::Belief&, const std::string&) const override {}
        std::string answer_from(const hfm::Belief&) const override { return "search a wider area for log"; }
    };
    const auto out = hfm::run_dialogue(hfm::DialoguePolicy(theta), expert, OneSlot(), cfg);
    CHECK(out.timeouts == 1);
    CHECK(out.responses.empty());
    CHECK(out.transcript.segments[1].text == hfm::kNoResponse);
}

TEST_CASE("late responses to timed-out queries are rejected") {
    ExpertGateway gw;
    Console c(gw.port());
    wait_connected(gw);
    CHECK_FALSE(gw.ask(query("t-1", "q"), {}, 50ms));
    c.read_type("query");
    c.send({{"type", "response"}, {"id", "t-1"}, {"text", "too late"}});
    const auto err = c.read_type("error");
    CHECK(err["id"] == "t-1");
    CHECK(err["error"] == "already_timed_out");
    CHECK_THROWS_AS(gw.ask(query("t-1", "again"), {}, 10ms), std::invalid_argument);
}

TEST_CASE("protocol errors") {
    ExpertGateway gw;
    Console c(gw.port());
    wait_connected(gw);
    auto fut = std::async(std::launch::async, [&] { return gw.ask(query("e-1", "q"), {}, 5000ms); });
    c.read_type("query");
    c.send({{"type", "response"}, {"id", "e-1"}, {"text", ""}});
    CHECK(c.read_type("error")["error"] == "empty_response");
    c.send({{"type", "shout"}, {"id", "e-1"}});
    CHECK(c.read_type("error")["error"] == "bad_message");
    c.send_raw("not json\n");
    CHECK(c.read_type("error")["error"] == "bad_message");
    c.send({{"type", "response"}, {"id", "e-1"}, {"text", "ok"}});
    CHECK(fut.get()->text == "ok");
    c.send({{"type", "response"}, {"id", "e-1"}, {"text", "twice"}});
    CHECK(c.read_type("error")["error"] == "already_answered");
}

TEST_CASE("outstanding queries are replayed to a reconnecting console") {
    ExpertGateway gw;
    auto first = std::make_unique<Console>(gw.port());
    wait_connected(gw);
    auto fut = std::async(std::launch::async, [&] { return gw.ask(query("r-1", "still there?"), {}, 5000ms); });
    first->read_type("query");
    first->close();
    for (int i = 0; i < 200 && gw.console_connected(); ++i) std::this_thread::sleep_for(5ms);
    CHECK(gw.outstanding() == 1);
    Console second(gw.port());
    const auto q = second.read_type("query");
    CHECK(q["id"] == "r-1");
    second.send({{"type", "response"}, {"id", "r-1"}, {"text", "yes"}});
    CHECK(fut.get()->text == "yes");
}

TEST_CASE("episode updates carry metrics") {
    ExpertGateway gw;
    Console c(gw.port());
    wait_connected(gw);
    gw.publish_episode_update({{"task_id", "craft_torch"}, {"success", true}, {"human_ratio", 2.5}});
    const auto m = c.read_type("episode_update");
    CHECK(m["task_id"] == "craft_torch");
    CHECK(m["human_ratio"] == 2.5);
}

TEST_CASE("stopping releases blocked askers") {
    ExpertGateway gw;
    auto fut = std::async(std::launch::async, [&] { return gw.ask(query("s-1", "q"), {}, 0ms); });
    while (gw.outstanding() == 0) std::this_thread::sleep_for(5ms);
    gw.stop();
    CHECK_FALSE(fut.get());
}
