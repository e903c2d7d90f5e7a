#pragma once

#include <deque>
#include <string>

#include "occureward/errors.hpp"

namespace occureward {

// Proposes reward weights from a prompt. One implementation is a remote
// chat-completion service, the other a deterministic scripted table.
class RewardEngineer {
 public:
  virtual ~RewardEngineer() = default;
  virtual std::string propose(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
  virtual int call_count() const = 0;
};

// Replays a fixed queue of canned responses, one per propose() call.
class ScriptedEngineer : public RewardEngineer {
 public:
  ScriptedEngineer() = default;
  explicit ScriptedEngineer(std::deque<std::string> responses);

  void push_response(std::string response);

  std::string propose(const std::string& prompt) override;
  std::string name() const override { return "scripted"; }
  int call_count() const override { return calls_; }

 private:
  std::deque<std::string> responses_;
  int calls_ = 0;
};

// The default three-round weight table. Round values other than the round-3
// equity coefficient are desk defaults, not published numbers.
ScriptedEngineer default_scripted_engineer();

struct HttpEngineerConfig {
  std::string base_url = "http://localhost:8080/v1";
  std::string model = "desk-engineer";
  std::string api_key;  // resolved from api_key_env when empty
  std::string api_key_env = "OCCUREWARD_API_KEY";
  double temperature = 0.0;
  int timeout_seconds = 60;
  int transport_retries = 2;
  int retry_backoff_ms = 250;
};

// Generic chat-completion client: POST {base_url}/chat/completions with the
// prompt as a single user message, sampled at temperature 0.
class HttpEngineer : public RewardEngineer {
 public:
  explicit HttpEngineer(HttpEngineerConfig cfg);

  std::string propose(const std::string& prompt) override;
  std::string name() const override { return "http:" + cfg_.model; }
  int call_count() const override { return calls_; }

 private:
  HttpEngineerConfig cfg_;
  std::string scheme_host_;
  std::string path_prefix_;
  int calls_ = 0;
};

}  // namespace occureward
