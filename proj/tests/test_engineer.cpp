#include <doctest.h>

#include "occureward/engineer.hpp"
#include "occureward/refinement.hpp"

// httplib last: its resolv.h pull-in defines macros that collide with Eigen.
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace occureward;
using json = nlohmann::json;

namespace {

// Ensures the key variable is absent for the duration of a test.
struct ClearedKey {
  ClearedKey() { ::unsetenv("OCCUREWARD_API_KEY"); }
};

struct TestServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  explicit TestServer(httplib::Server::Handler handler) {
    server.Post("/v1/chat/completions", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer() {
    server.stop();
    thread.join();
  }

  HttpEngineerConfig config() const {
    HttpEngineerConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.api_key = "test-key";
    cfg.timeout_seconds = 5;
    cfg.retry_backoff_ms = 0;
    return cfg;
  }
};

std::string completion_body(const std::string& content) {
  return json{{"choices",
               json::array({json{{"message", json{{"role", "assistant"},
                                                  {"content", content}}}}})}}
      .dump();
}

}  // namespace

TEST_CASE("scripted engineer replays its queue and counts calls") {
  ScriptedEngineer eng({"one", "two"});
  CHECK(eng.propose("p") == "one");
  CHECK(eng.propose("p") == "two");
  CHECK(eng.call_count() == 2);
  CHECK_THROWS_AS(eng.propose("p"), Error);
  CHECK(eng.name() == "scripted");
}

TEST_CASE("default scripted table parses into valid round weights") {
  ScriptedEngineer eng = default_scripted_engineer();
  const auto w1 = parse_weights(eng.propose(""), 1, WeightProvenance::Scripted);
  CHECK(w1.equity_w == 0.0);
  CHECK(w1.cost_w == doctest::Approx(1.0));
  const auto w2 = parse_weights(eng.propose(""), 2, WeightProvenance::Scripted);
  CHECK(w2.equity_w == 0.0);
  const auto w3 = parse_weights(eng.propose(""), 3, WeightProvenance::Scripted);
  CHECK(w3.equity_w == doctest::Approx(0.15));
  CHECK(w3.solar_w > w1.solar_w);
  CHECK(w3.soc_w > w1.soc_w);
}

TEST_CASE("http engineer requires an api key before anything runs") {
  ClearedKey cleared;
  HttpEngineerConfig cfg;
  try {
    HttpEngineer engineer(cfg);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("OCCUREWARD_API_KEY") != std::string::npos);
  }
}

TEST_CASE("http engineer posts a chat completion and extracts the text") {
  std::string seen_auth, seen_body;
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(completion_body("{\"cost\":1,\"carbon\":1,\"solar\":0,\"soc\":0,"
                                    "\"equity\":0}"),
                    "application/json");
  });

  HttpEngineer engineer(server.config());
  const std::string reply = engineer.propose("hello engineer");
  CHECK(reply.find("\"cost\":1") != std::string::npos);
  CHECK(engineer.call_count() == 1);
  CHECK(seen_auth == "Bearer test-key");

  const json body = json::parse(seen_body);
  CHECK(body.at("temperature").get<double>() == 0.0);
  CHECK(body.at("messages").at(0).at("content").get<std::string>() == "hello engineer");
  CHECK(body.at("messages").at(0).at("role").get<std::string>() == "user");
}

TEST_CASE("http engineer retries transient server errors") {
  std::atomic<int> hits{0};
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits.fetch_add(1) < 2) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(completion_body("ok"), "application/json");
  });
  HttpEngineer engineer(server.config());
  CHECK(engineer.propose("p") == "ok");
  CHECK(hits.load() == 3);
}

TEST_CASE("http engineer surfaces hard failures") {
  SUBCASE("non-retryable status") {
    TestServer server([](const httplib::Request&, httplib::Response& res) {
      res.status = 401;
      res.set_content("who are you", "text/plain");
    });
    HttpEngineer engineer(server.config());
    try {
      engineer.propose("p");
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Transport);
    }
  }

  SUBCASE("malformed completion payload") {
    TestServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"nope\": true}", "application/json");
    });
    HttpEngineer engineer(server.config());
    try {
      engineer.propose("p");
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
    }
  }

  SUBCASE("unreachable endpoint") {
    HttpEngineerConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";  // discard port, nothing listens
    cfg.api_key = "k";
    cfg.timeout_seconds = 1;
    cfg.transport_retries = 1;
    cfg.retry_backoff_ms = 0;
    HttpEngineer engineer(cfg);
    try {
      engineer.propose("p");
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Transport);
    }
  }
}
