#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "sde/clustering.hpp"
#include "sde/corpus.hpp"
#include "sde/executor.hpp"

namespace testing {

inline const std::filesystem::path kFixtures = SDE_FIXTURE_DIR;
inline const std::filesystem::path kShim = kFixtures / "mini_shim.py";

inline sde::Outcome ok(std::string s) { return sde::Outcome::normal(std::move(s)); }
inline sde::Outcome err(std::string cls) { return sde::Outcome::abnormal(sde::ErrorType::runtime(std::move(cls))); }
inline sde::Outcome timeout() { return sde::Outcome::abnormal(sde::ErrorType::timeout()); }

inline sde::ExecutionSignature sig(int rank, std::vector<sde::Outcome> outcomes, std::string task = "t") {
  return {std::move(task), rank, std::move(outcomes)};
}

/// Signatures for a two-cluster task over N inputs: ranks in `first` share
/// one behaviour, the rest differ from it on the first `differing` inputs.
inline std::vector<sde::ExecutionSignature> two_cluster_sigs(const std::vector<int>& first, int k, int n,
                                                             int differing) {
  std::vector<sde::ExecutionSignature> out;
  for (int r = 1; r <= k; ++r) {
    const bool in_first = std::find(first.begin(), first.end(), r) != first.end();
    std::vector<sde::Outcome> o;
    for (int i = 0; i < n; ++i) o.push_back(ok(std::to_string(i) + (!in_first && i < differing ? "x" : "")));
    out.push_back(sig(r, std::move(o)));
  }
  return out;
}

inline sde::Task function_task(std::string id, std::string entry, std::vector<sde::Parameter> params,
                               std::vector<nlohmann::json> seeds = {}) {
  sde::Task t;
  t.task_id = std::move(id);
  t.interface = sde::FunctionInterface{std::move(entry), std::move(params), std::nullopt};
  for (auto& s : seeds) t.seed_inputs.push_back(sde::InputValue::args(std::move(s)));
  return t;
}

inline sde::Task stdin_task(std::string id, std::vector<std::string> seeds = {}) {
  sde::Task t;
  t.task_id = std::move(id);
  t.interface = sde::StdinProgram{};
  for (auto& s : seeds) t.seed_inputs.push_back(sde::InputValue::stdin_text(std::move(s)));
  return t;
}

inline bool have_python() { return std::system("python3 -c pass >/dev/null 2>&1") == 0; }

}  // namespace testing
