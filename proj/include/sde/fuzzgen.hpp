#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sde/corpus.hpp"
#include "sde/rng.hpp"
#include "sde/type_hint.hpp"

namespace sde {

enum class FuzzMode { Seeded, SeedFree };

std::string to_string(FuzzMode mode);
FuzzMode parse_fuzz_mode(std::string_view text);

struct FuzzConfig {
  int n_inputs = 10;
  FuzzMode mode = FuzzMode::Seeded;
  std::uint64_t rng_seed = 1;
  int max_attempts_per_input = 100;
  std::int64_t numeric_magnitude_cap = 1'000'000;
  int max_collection_len = 32;

  /// Throws InvalidArgument when a count or cap is not positive.
  void validate() const;
};

/// Seeds used for the three-run fuzz robustness protocol.
inline constexpr std::uint64_t kRobustnessSeeds[] = {1, 2, 3};

/// Draws structure-preserving mutants of a task's seed inputs. Each draw
/// picks a seed uniformly and applies 1-3 type-specific mutations.
class SeedMutator {
 public:
  /// Throws NoSeeds when the task has no seed inputs.
  SeedMutator(const Task& task, const FuzzConfig& config);

  /// Throws ExhaustedAttempts when no structurally valid mutant appears
  /// within max_attempts_per_input tries.
  InputValue next();

 private:
  const Task& task_;
  FuzzConfig config_;
  Rng rng_;
  std::vector<TypeHint> seed_shapes_;
};

/// Exactly n_inputs mutants; deterministic in (task_id, rng_seed).
std::vector<InputValue> mutate_seeded(const Task& task, const FuzzConfig& config);

/// One hint per declared parameter: annotations first, then name rules,
/// then description keywords, else Unknown. Stdin tasks yield an empty list.
std::vector<TypeHint> infer_types(const Task& task);

/// Hint for a bare parameter name from the fixed name-rule table.
TypeHint hint_from_name(std::string_view name);

/// Draws one value of the given type from the generic type-level generators.
nlohmann::json sample_value(const TypeHint& hint, const FuzzConfig& config, Rng& rng, int depth = 0);

/// n_inputs argument tuples, deterministic in `rng`'s seed.
std::vector<InputValue> sample_seed_free(const std::vector<TypeHint>& hints, const FuzzConfig& config, Rng& rng);
std::vector<InputValue> sample_seed_free(const std::vector<TypeHint>& hints, const FuzzConfig& config);

/// Canonical identity of an input under output normalisation.
std::string input_key(const InputValue& input);

struct DedupeResult {
  std::vector<InputValue> inputs;
  bool shortfall = false;  // fewer than `target` distinct inputs were found
};

/// Keeps first occurrences in order, then calls `regenerate` until `target`
/// distinct inputs exist or the attempt budget is spent.
DedupeResult dedupe_and_fill(const std::vector<InputValue>& candidates, int target, const FuzzConfig& config,
                             const std::function<InputValue()>& regenerate);

struct InputSet {
  std::vector<InputValue> inputs;
  bool uniqueness_shortfall = false;
};

/// Full stage-2 generation for one task in the configured mode.
InputSet generate_inputs(const Task& task, const FuzzConfig& config);

nlohmann::json input_set_to_json(const Task& task, const InputSet& set);
InputSet input_set_from_json(const Task& task, const nlohmann::json& j);

}  // namespace sde
