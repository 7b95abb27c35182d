#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wot/costs.hpp"
#include "wot/ctransform.hpp"
#include "wot/measures.hpp"
#include "wot/moments.hpp"
#include "wot/neural.hpp"
#include "wot/payoffs.hpp"

namespace wot {

using Json = nlohmann::ordered_json;

/// Names of the runnable experiments, in CLI order.
const std::vector<std::string>& experiment_names();

/// Command-line overrides applied on top of the file and the defaults.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool reproducible = false;
  std::optional<int> epochs;
};

/// Fully resolved experiment configuration: defaults merged with the user
/// file and the overrides. `values` is what gets echoed into result files.
struct ExperimentConfig {
  std::string experiment;
  Json values;

  std::uint64_t seed() const;
  std::string out_dir() const;
  bool reproducible() const;
};

/// Defaults of one experiment as a JSON object.
Json experiment_defaults(const std::string& experiment);

/// Parses a config file. A file whose first non-blank character is '{' is
/// JSON; anything else is `dotted.key = value` lines with '#' comments.
Json parse_config_text(const std::string& text);
Json load_config_file(const std::string& path);

/// Merges `user` into the defaults of `experiment`, applies the overrides
/// and validates every spec. Unknown keys and type mismatches throw
/// ConfigError.
ExperimentConfig resolve_config(const std::string& experiment, const Json& user, const RunOptions& opts = {});
ExperimentConfig load_config(const std::string& experiment, const std::optional<std::string>& path,
                             const RunOptions& opts = {});

// Builders from JSON specs. They throw ConfigError on malformed input.
ReferenceMeasure build_measure(const Json& spec);
/// `dim` is used by payoff families whose dimension is not implied by
/// their parameters (max_call, constant, ...), unless the block sets "dim".
Payoff build_payoff(const Json& spec, int dim);
CostSpec build_cost(const Json& spec);
SearchConfig build_search(const Json& spec);
TrainConfig build_train(const Json& spec, std::uint64_t seed);
std::vector<GridAxis> build_axes(const Json& spec);
MomentOptions build_moment_options(const Json& spec, std::uint64_t seed);
/// Instruments from the inline list and/or the CSV file (name,strike,bid,ask),
/// each a call on the basket of all coordinates.
std::vector<Instrument> build_instruments(const Json& spec, int dim);
std::vector<Instrument> load_instruments_csv(const std::string& path, int dim);

}  // namespace wot
