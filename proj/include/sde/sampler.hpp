#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sde/corpus.hpp"

namespace sde {

/// Client settings for an OpenAI-compatible chat-completions endpoint.
struct SamplerConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.6;
  int k_samples = 10;
  int max_tokens = 2048;
  std::string api_key_env_var = "OPENAI_API_KEY";
  int request_timeout_ms = 60'000;
  int retry_limit = 3;      // extra attempts after the first failure
  int backoff_ms = 500;     // doubled after every failed attempt
  /// {description}, {entry_name} and {language} are substituted.
  std::string prompt_template = "{description}";
  std::string system_prompt;

  void validate() const;
};

struct SampleResult {
  std::vector<CandidateProgram> candidates;  // ranks 1..K, arrival order
  std::vector<nlohmann::json> raw_responses; // same order, for the archive
};

/// K sequential requests; rank i is the i-th completion to arrive. Throws
/// MissingApiKey before any request when the variable is unset, and
/// HttpError once a request has failed retry_limit + 1 times. A response
/// without code yields a candidate with empty source.
SampleResult sample_candidates(const Task& task, const SamplerConfig& config);

/// Rebuilds the candidates of a SampleResult from its archived responses.
std::vector<CandidateProgram> candidates_from_archive(const std::string& task_id,
                                                      const std::vector<nlohmann::json>& raw_responses);

/// Body of the first fenced code block, or the whole text when unfenced.
std::string strip_code_fences(std::string_view text);

std::string render_prompt(const std::string& tmpl, const Task& task);

}  // namespace sde
