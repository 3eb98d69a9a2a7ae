#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edet/csv.hpp"
#include "edet/model.hpp"
#include "edet/train.hpp"

namespace edet {

/// Input description: either a delimiter-separated file laid out by `columns`,
/// or (when `input` is empty) a generated stream using the built-in schema.
struct DataConfig {
    std::string input;
    std::vector<std::string> columns;
    std::string label_column = "label";
    std::string delimiter = ",";
    bool has_header = true;
    std::vector<std::string> selected;
    std::string categorical;
    int window = 20;

    Schema schema() const;
};

struct SyntheticConfig {
    std::uint64_t n_packets = 20000;
    double attack_fraction = 0.5;
    double spread = 1.0;
};

/// Everything one run needs, loadable from a single JSON file and overridable
/// with dotted `--set key=value` paths.
struct RunConfig {
    DataConfig data;
    SyntheticConfig synthetic;
    ModelConfig model;
    TrainConfig train;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";

    void validate() const; // throws SpecError
};

RunConfig default_run_config();

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j); // throws SpecError
RunConfig load_run_config(const std::string& path);      // throws SpecError

/// Apply one "dotted.path=value" override onto the JSON form. The value text
/// is parsed as JSON when possible (numbers, booleans, arrays) and taken as a
/// bare string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

std::string optimizer_to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s); // throws SpecError

} // namespace edet
