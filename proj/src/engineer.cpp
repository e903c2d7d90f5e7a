#include "occureward/engineer.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>
#include <utility>

namespace occureward {

using json = nlohmann::json;

ScriptedEngineer::ScriptedEngineer(std::deque<std::string> responses)
    : responses_(std::move(responses)) {}

void ScriptedEngineer::push_response(std::string response) {
  responses_.push_back(std::move(response));
}

std::string ScriptedEngineer::propose(const std::string& prompt) {
  (void)prompt;
  ++calls_;
  if (responses_.empty()) {
    throw Error(ErrorCode::Config, "scripted engineer has no response left");
  }
  std::string r = std::move(responses_.front());
  responses_.pop_front();
  return r;
}

ScriptedEngineer default_scripted_engineer() {
  return ScriptedEngineer({
      "Prioritizing grid cost with a secondary carbon objective.\n"
      "{\"cost\": 1.0, \"carbon\": 0.8, \"solar\": 0.2, \"soc\": 0.2, \"equity\": 0.0}",
      "KPIs show cost above the baseline; pushing harder on cost and carbon.\n"
      "{\"cost\": 1.2, \"carbon\": 1.0, \"solar\": 0.2, \"soc\": 0.2, \"equity\": 0.0}",
      "CEI and the per-profile scores show one group left behind. Raising solar and\n"
      "storage utilization to fund comfort, and activating the equity term.\n"
      "{\"cost\": 1.0, \"carbon\": 0.8, \"solar\": 0.6, \"soc\": 0.5, \"equity\": 0.15}",
  });
}

HttpEngineer::HttpEngineer(HttpEngineerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.api_key.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || key[0] == '\0') {
      throw Error(ErrorCode::Config,
                  "remote engineer requires an API key in $" + cfg_.api_key_env);
    }
    cfg_.api_key = key;
  }
  // Split "scheme://host:port/prefix" into the client target and path prefix.
  const auto scheme_end = cfg_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::Config, "base_url must carry a scheme, e.g. http://host:port");
  }
  const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_ = cfg_.base_url;
    path_prefix_.clear();
  } else {
    scheme_host_ = cfg_.base_url.substr(0, path_start);
    path_prefix_ = cfg_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
      path_prefix_.pop_back();
    }
  }
}

std::string HttpEngineer::propose(const std::string& prompt) {
  ++calls_;
  const json body{{"model", cfg_.model},
                  {"temperature", cfg_.temperature},
                  {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
  const std::string payload = body.dump();
  const std::string path = path_prefix_ + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.transport_retries; ++attempt) {
    if (attempt > 0 && cfg_.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_backoff_ms * attempt));
    }
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(cfg_.timeout_seconds, 0);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    client.set_bearer_token_auth(cfg_.api_key);
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::Transport,
                  "engineer endpoint returned status " + std::to_string(res->status) +
                      ": " + res->body);
    }
    try {
      const json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse,
                  std::string("malformed chat-completion response: ") + e.what());
    }
  }
  throw Error(ErrorCode::Transport, "engineer unreachable after " +
                                        std::to_string(cfg_.transport_retries + 1) +
                                        " attempts (" + last_error + ")");
}

}  // namespace occureward
