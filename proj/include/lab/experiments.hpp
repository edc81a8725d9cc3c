#pragma once

// Declarative experiment runner.  A config (JSON) names one experiment and
// its parameters; run_experiment validates it, dispatches to the module
// drivers, and writes CSV/JSON artifacts plus a manifest.  Outputs are
// deterministic in (config, master_seed) regardless of the thread count.

#include <string>
#include <vector>

#include <json.hpp>

namespace lab {

using json = nlohmann::json;

struct RunResult {
    int exit_code = 0; // 0 ok; 4 = a built-in check experiment failed its assertion
    std::vector<std::string> artifacts;
    std::string summary;
};

// Known experiment names.
const std::vector<std::string>& experiment_names();

// Minimal well-formed config for an experiment (used by docs and tests).
json default_config(const std::string& experiment);

// Apply a --set key=value override; dotted keys address nested objects and
// values parse as JSON when possible, else as strings.
void apply_override(json& config, const std::string& dotted_key, const std::string& value);

RunResult run_experiment(const json& config, const std::string& out_dir);

} // namespace lab
