#include "sde/sampler.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "sde/error.hpp"

namespace sde {

using json = nlohmann::json;

void SamplerConfig::validate() const {
  if (k_samples < 1) throw Error(ErrorKind::InvalidArgument, "k_samples must be >= 1");
  if (!(temperature >= 0.0)) throw Error(ErrorKind::InvalidArgument, "temperature must be >= 0");
  if (retry_limit < 0) throw Error(ErrorKind::InvalidArgument, "retry_limit must be >= 0");
  if (request_timeout_ms <= 0) throw Error(ErrorKind::InvalidArgument, "request_timeout_ms must be > 0");
}

std::string strip_code_fences(std::string_view text) {
  std::string_view body = text;
  if (const auto open = text.find("```"); open != std::string_view::npos) {
    // skip the info string ("python", "cpp", ...) on the fence line
    const auto start = text.find('\n', open);
    if (start == std::string_view::npos) return {};
    body = text.substr(start + 1);
    if (const auto close = body.find("```"); close != std::string_view::npos) body = body.substr(0, close);
  }
  std::string s(body);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (!s.empty()) s += '\n';
  return s;
}

std::string render_prompt(const std::string& tmpl, const Task& task) {
  std::string entry;
  if (const auto* f = task.function()) entry = f->entry_name;
  std::string out = tmpl;
  const std::pair<std::string, std::string> subs[] = {
      {"{description}", task.description}, {"{entry_name}", entry}, {"{language}", task.language.name()}};
  for (const auto& [key, value] : subs) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
      out.replace(pos, key.size(), value);
    }
  }
  return out;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error(ErrorKind::InvalidArgument, "bad endpoint url '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string completion_text(const json& response) {
  if (!response.contains("choices") || !response["choices"].is_array() || response["choices"].empty()) return {};
  const auto& choice = response["choices"][0];
  if (choice.contains("message") && choice["message"].contains("content") && choice["message"]["content"].is_string()) {
    return choice["message"]["content"].get<std::string>();
  }
  if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
  return {};
}

}  // namespace

std::vector<CandidateProgram> candidates_from_archive(const std::string& task_id,
                                                      const std::vector<json>& raw_responses) {
  std::vector<CandidateProgram> out;
  int rank = 1;
  for (const auto& r : raw_responses) out.push_back({task_id, rank++, strip_code_fences(completion_text(r))});
  return out;
}

SampleResult sample_candidates(const Task& task, const SamplerConfig& config) {
  config.validate();
  const char* key = std::getenv(config.api_key_env_var.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorKind::MissingApiKey, "environment variable " + config.api_key_env_var + " is not set");
  }
  const Endpoint ep = split_url(config.endpoint_url);
  httplib::Client client(ep.origin);
  const auto timeout = std::chrono::milliseconds(config.request_timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

  json messages = json::array();
  if (!config.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", config.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", render_prompt(config.prompt_template, task)}});
  const std::string body = json{{"model", config.model_name},
                                {"messages", messages},
                                {"temperature", config.temperature},
                                {"max_tokens", config.max_tokens},
                                {"n", 1}}
                               .dump();

  SampleResult result;
  for (int i = 0; i < config.k_samples; ++i) {
    int backoff = config.backoff_ms;
    std::string last_error;
    bool done = false;
    for (int attempt = 0; attempt <= config.retry_limit && !done; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
      auto res = client.Post(ep.path, headers, body, "application/json");
      if (!res) {
        last_error = "request failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorKind::HttpError, "HTTP " + std::to_string(res->status) + " from " + ep.origin);
      }
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) throw Error(ErrorKind::HttpError, "response body is not JSON");
      result.raw_responses.push_back(std::move(parsed));
      done = true;
    }
    if (!done) {
      throw Error(ErrorKind::HttpError, last_error + " after " + std::to_string(config.retry_limit + 1) + " attempts");
    }
  }
  result.candidates = candidates_from_archive(task.task_id, result.raw_responses);
  return result;
}

}  // namespace sde
