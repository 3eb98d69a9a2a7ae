#include "edet/runconfig.hpp"

#include <fstream>

#include "edet/cells.hpp"
#include "edet/errors.hpp"
#include "edet/features.hpp"
#include "edet/synthetic.hpp"

namespace edet {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!j.is_object())
        throw SpecError("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok)
            throw SpecError("config: unknown key \"" + where + key + "\"");
    }
}

template <class T>
void get_to(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key))
        return;
    try {
        j.at(key).get_to(out);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("config: bad value for \"" + where + key + "\": " + e.what());
    }
}

} // namespace

Schema DataConfig::schema() const {
    if (delimiter.size() != 1)
        throw SpecError("config: data.delimiter must be a single character");
    Schema s;
    s.columns = columns;
    s.label_column = label_column;
    s.delimiter = delimiter[0];
    s.has_header = has_header;
    return s;
}

void RunConfig::validate() const {
    Schema s = data.schema();
    s.validate();
    if (data.window < 1)
        throw SpecError("config: data.window must be >= 1");
    if (data.selected.size() != 11)
        throw SpecError("config: data.selected must list exactly 11 columns");
    for (const auto& name : data.selected)
        if (s.column_index(name) < 0)
            throw SpecError("config: selected column \"" + name + "\" not in schema");
    bool cat_selected = false;
    for (const auto& name : data.selected)
        if (name == data.categorical)
            cat_selected = true;
    if (!cat_selected)
        throw SpecError("config: data.categorical must be one of data.selected");
    if (synthetic.n_packets < 1)
        throw SpecError("config: synthetic.n_packets must be >= 1");
    if (!(synthetic.attack_fraction >= 0.0 && synthetic.attack_fraction <= 1.0))
        throw SpecError("config: synthetic.attack_fraction must lie in [0, 1]");
    if (!(synthetic.spread > 0.0))
        throw SpecError("config: synthetic.spread must be positive");
    model.validate();
    train.validate();
    if (threads < 1)
        throw SpecError("config: threads must be >= 1");
    if (out.empty())
        throw SpecError("config: out directory must be set");
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.data.columns = synthetic_schema().columns;
    cfg.data.selected = {"dur",   "sbytes", "dbytes", "sttl",  "dttl",        "sload",
                         "dload", "spkts",  "dpkts",  "state", "ct_state_ttl"};
    cfg.data.categorical = "state";
    cfg.model = edge_detect_config(CellKind::FastGRNN);
    return cfg;
}

std::string optimizer_to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "adam")
        return Optimizer::Adam;
    if (s == "sgd")
        return Optimizer::SGD;
    throw SpecError("config: unknown optimizer \"" + s + "\" (expected adam or sgd)");
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    return nlohmann::json{
        {"data",
         {{"input", cfg.data.input},
          {"columns", cfg.data.columns},
          {"label_column", cfg.data.label_column},
          {"delimiter", cfg.data.delimiter},
          {"has_header", cfg.data.has_header},
          {"selected", cfg.data.selected},
          {"categorical", cfg.data.categorical},
          {"window", cfg.data.window}}},
        {"synthetic",
         {{"n_packets", cfg.synthetic.n_packets},
          {"attack_fraction", cfg.synthetic.attack_fraction},
          {"spread", cfg.synthetic.spread}}},
        {"model",
         {{"cell", to_string(cfg.model.cell)},
          {"rnn_layers", cfg.model.rnn_layers},
          {"hidden", cfg.model.hidden},
          {"dense", cfg.model.dense},
          {"threshold", cfg.model.threshold}}},
        {"train",
         {{"epochs", cfg.train.epochs},
          {"batch_size", cfg.train.batch_size},
          {"learning_rate", cfg.train.learning_rate},
          {"lr_decay", cfg.train.lr_decay},
          {"patience", cfg.train.patience},
          {"optimizer", optimizer_to_string(cfg.train.optimizer)},
          {"val_fraction", cfg.train.val_fraction},
          {"pos_weight", cfg.train.pos_weight}}},
        {"seed", cfg.seed},
        {"threads", cfg.threads},
        {"out", cfg.out}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg = default_run_config();
    check_keys(j, {"data", "synthetic", "model", "train", "seed", "threads", "out"}, "");
    if (j.contains("data")) {
        const auto& d = j.at("data");
        check_keys(d,
                   {"input", "columns", "label_column", "delimiter", "has_header", "selected",
                    "categorical", "window"},
                   "data.");
        get_to(d, "input", cfg.data.input, "data.");
        get_to(d, "columns", cfg.data.columns, "data.");
        get_to(d, "label_column", cfg.data.label_column, "data.");
        get_to(d, "delimiter", cfg.data.delimiter, "data.");
        get_to(d, "has_header", cfg.data.has_header, "data.");
        get_to(d, "selected", cfg.data.selected, "data.");
        get_to(d, "categorical", cfg.data.categorical, "data.");
        get_to(d, "window", cfg.data.window, "data.");
    }
    if (j.contains("synthetic")) {
        const auto& s = j.at("synthetic");
        check_keys(s, {"n_packets", "attack_fraction", "spread"}, "synthetic.");
        get_to(s, "n_packets", cfg.synthetic.n_packets, "synthetic.");
        get_to(s, "attack_fraction", cfg.synthetic.attack_fraction, "synthetic.");
        get_to(s, "spread", cfg.synthetic.spread, "synthetic.");
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        check_keys(m, {"cell", "rnn_layers", "hidden", "dense", "threshold"}, "model.");
        std::string cell = to_string(cfg.model.cell);
        get_to(m, "cell", cell, "model.");
        cfg.model.cell = cell_kind_from_string(cell);
        get_to(m, "rnn_layers", cfg.model.rnn_layers, "model.");
        get_to(m, "hidden", cfg.model.hidden, "model.");
        get_to(m, "dense", cfg.model.dense, "model.");
        get_to(m, "threshold", cfg.model.threshold, "model.");
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t,
                   {"epochs", "batch_size", "learning_rate", "lr_decay", "patience", "optimizer",
                    "val_fraction", "pos_weight"},
                   "train.");
        get_to(t, "epochs", cfg.train.epochs, "train.");
        get_to(t, "batch_size", cfg.train.batch_size, "train.");
        get_to(t, "learning_rate", cfg.train.learning_rate, "train.");
        get_to(t, "lr_decay", cfg.train.lr_decay, "train.");
        get_to(t, "patience", cfg.train.patience, "train.");
        std::string opt = optimizer_to_string(cfg.train.optimizer);
        get_to(t, "optimizer", opt, "train.");
        cfg.train.optimizer = optimizer_from_string(opt);
        get_to(t, "val_fraction", cfg.train.val_fraction, "train.");
        get_to(t, "pos_weight", cfg.train.pos_weight, "train.");
    }
    get_to(j, "seed", cfg.seed, "");
    get_to(j, "threads", cfg.threads, "");
    get_to(j, "out", cfg.out, "");
    cfg.train.seed = cfg.seed;
    cfg.model.input = 10 + FeatureSpec::kVocabWidth;
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SpecError("config: cannot open \"" + path + "\"");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("config: \"" + path + "\" is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw SpecError("override \"" + assignment + "\" must look like key.path=value");
    std::string path = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    nlohmann::json* node = &j;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty())
            throw SpecError("override \"" + assignment + "\" has an empty path segment");
        if (dot == std::string::npos) {
            nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

} // namespace edet
