#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "edet/cells.hpp"
#include "edet/csv.hpp"
#include "edet/errors.hpp"
#include "edet/features.hpp"
#include "edet/metrics.hpp"
#include "edet/model.hpp"
#include "edet/model_io.hpp"
#include "edet/monitor.hpp"
#include "edet/runconfig.hpp"
#include "edet/stream.hpp"
#include "edet/synthetic.hpp"
#include "edet/train.hpp"

namespace {

using namespace edet;

struct GlobalArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SpecError("cannot open \"" + path + "\"");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("\"" + path + "\" is not valid JSON: " + std::string(e.what()));
    }
    return j;
}

nlohmann::json resolved_json(const GlobalArgs& g) {
    nlohmann::json j = g.config_path.empty() ? run_config_to_json(default_run_config())
                                             : read_json_file(g.config_path);
    for (const auto& s : g.overrides)
        apply_override(j, s);
    if (g.seed)
        j["seed"] = *g.seed;
    if (g.threads)
        j["threads"] = *g.threads;
    if (g.out)
        j["out"] = *g.out;
    return j;
}

RunConfig resolve_config(const GlobalArgs& g) { return run_config_from_json(resolved_json(g)); }

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.out) / name;
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec)
        throw SpecError("cannot create output directory \"" + cfg.out + "\": " + ec.message());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw SpecError("cannot open \"" + path.string() + "\" for writing");
    out << text;
    if (!out)
        throw SpecError("short write to \"" + path.string() + "\"");
}

std::vector<PacketRecord> read_records(const std::string& path, const Schema& schema,
                                       std::uint64_t& skipped) {
    std::ifstream in(path);
    if (!in)
        throw SpecError("cannot open input \"" + path + "\"");
    CsvReader reader(in, schema);
    std::vector<PacketRecord> records;
    while (true) {
        try {
            auto rec = reader.next();
            if (!rec)
                break;
            records.push_back(std::move(*rec));
        } catch (const ParseError& e) {
            ++skipped;
            std::cerr << "warning: " << path << ": skipping row: " << e.what() << '\n';
        }
    }
    return records;
}

void check_digest(const ModelParams& m, const FeatureSpec& spec) {
    bool tagged = false;
    for (auto b : m.feature_digest)
        if (b != 0)
            tagged = true;
    if (tagged && m.feature_digest != feature_spec_digest(spec))
        throw DigestMismatch("model was trained under a different feature spec; "
                             "re-run preprocessing and training together");
}

int cmd_preprocess(const GlobalArgs& g, const std::string& input_flag) {
    RunConfig cfg = resolve_config(g);
    Schema schema = cfg.data.schema();
    std::string input = input_flag.empty() ? cfg.data.input : input_flag;

    std::uint64_t skipped = 0;
    std::vector<PacketRecord> records;
    if (input.empty())
        records = generate_synthetic(cfg.synthetic.n_packets, cfg.synthetic.attack_fraction,
                                     cfg.seed, cfg.synthetic.spread);
    else
        records = read_records(input, schema, skipped);

    FeatureSpec spec = fit_feature_spec(records, schema, cfg.data.selected, cfg.data.categorical);
    FeatureEncoder enc(spec, schema);
    WindowSet ws = engineer_windows(records, enc, cfg.data.window);

    ensure_out_dir(cfg);
    auto archive = out_path(cfg, "windows.edw");
    auto spec_file = out_path(cfg, "feature_spec.json");
    save_window_archive(ws, archive.string());
    save_feature_spec(spec, spec_file.string());

    double attack_frac =
        ws.count() == 0 ? 0.0
                        : static_cast<double>(ws.attack_count()) / static_cast<double>(ws.count());
    std::cout << "packets: " << ws.packet_count() << '\n'
              << "skipped: " << skipped << '\n'
              << "windows: " << ws.count() << '\n';
    std::printf("window_attack_fraction: %.4f\n", attack_frac);
    std::cout << "archive: " << archive.string() << '\n'
              << "feature_spec: " << spec_file.string() << '\n';
    return 0;
}

int cmd_train(const GlobalArgs& g, std::string windows, std::string spec_path,
              std::string model_out) {
    RunConfig cfg = resolve_config(g);
    if (windows.empty())
        windows = out_path(cfg, "windows.edw").string();
    if (spec_path.empty())
        spec_path = out_path(cfg, "feature_spec.json").string();
    if (model_out.empty())
        model_out = out_path(cfg, "model.edm").string();

    WindowSet ws = load_window_archive(windows);
    FeatureSpec spec = load_feature_spec(spec_path);
    if (ws.width() != spec.engineered_width())
        throw ShapeError("window archive width does not match the feature spec");

    ModelConfig mc = cfg.model;
    mc.input = spec.engineered_width();
    ModelParams model = build_model(mc, cfg.seed);
    model.feature_digest = feature_spec_digest(spec);

    TrainResult tr = train_model(std::move(model), ws, cfg.train);

    ensure_out_dir(cfg);
    save_model(tr.model, model_out);

    nlohmann::json hist = nlohmann::json::array();
    for (const auto& e : tr.history)
        hist.push_back({{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"val_loss", e.val_loss},
                        {"val_accuracy", e.val_accuracy},
                        {"learning_rate", e.learning_rate}});
    nlohmann::json report{{"cell", to_string(tr.model.config.cell)},
                          {"best_epoch", tr.best_epoch},
                          {"epochs", hist}};
    write_text_file(out_path(cfg, "history.json"), report.dump(2) + "\n");

    for (const auto& e : tr.history)
        std::printf("epoch %3d  train_loss %.6f  val_loss %.6f  val_acc %.4f\n", e.epoch,
                    e.train_loss, e.val_loss, e.val_accuracy);
    std::cout << "best_epoch: " << tr.best_epoch << '\n'
              << "parameters: " << param_count(tr.model) << '\n'
              << "model: " << model_out << " (" << serialized_size_bytes(tr.model) << " bytes)\n";
    return 0;
}

std::size_t recurrent_param_count(const ModelParams& m) {
    std::size_t n = 0;
    for (const auto& c : m.cells)
        n += cell_param_count(c);
    return n;
}

void print_compare_table(const std::string& path_a, const ModelParams& a,
                         const std::string& path_b, const ModelParams& b, std::ostream& os) {
    auto row = [&os](const std::string& path, const ModelParams& m) {
        os << "  " << path << "\n    cell " << to_string(m.config.cell) << ", layers "
           << m.config.rnn_layers << ", hidden " << m.config.hidden << ", recurrent "
           << recurrent_param_count(m) << ", total " << param_count(m) << '\n';
    };
    os << "parameter comparison:\n";
    row(path_a, a);
    row(path_b, b);
    double ratio =
        static_cast<double>(param_count(a)) / static_cast<double>(param_count(b));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", ratio);
    os << "  total ratio: " << buf << '\n';
}

int cmd_eval(const GlobalArgs& g, std::string model_path, std::string windows,
             std::string spec_path, const std::string& compare_path) {
    RunConfig cfg = resolve_config(g);
    if (model_path.empty())
        model_path = out_path(cfg, "model.edm").string();
    if (windows.empty())
        windows = out_path(cfg, "windows.edw").string();
    if (spec_path.empty())
        spec_path = out_path(cfg, "feature_spec.json").string();

    ModelParams m = load_model(model_path);
    FeatureSpec spec = load_feature_spec(spec_path);
    WindowSet ws = load_window_archive(windows);
    check_digest(m, spec);

    MetricsReport report = evaluate_model(m, ws, m.config.threshold, cfg.threads);
    std::string json = metrics_json(report);
    ensure_out_dir(cfg);
    write_text_file(out_path(cfg, "metrics.json"), json + "\n");
    std::cout << json << '\n';

    if (!compare_path.empty()) {
        ModelParams other = load_model(compare_path);
        print_compare_table(model_path, m, compare_path, other, std::cerr);
    }
    return 0;
}

int cmd_detect(const GlobalArgs& g, std::string model_path, std::string spec_path,
               const std::string& input) {
    RunConfig cfg = resolve_config(g);
    if (model_path.empty())
        model_path = out_path(cfg, "model.edm").string();
    if (spec_path.empty())
        spec_path = out_path(cfg, "feature_spec.json").string();

    ModelParams m = load_model(model_path);
    FeatureSpec spec = load_feature_spec(spec_path);
    Schema schema = cfg.data.schema();
    FeatureEncoder enc(spec, schema);
    StreamDetector det(m, enc, cfg.data.window);

    StreamCounters c;
    if (input == "-") {
        c = detect_stream(std::cin, schema, det, std::cout, &std::cerr);
    } else {
        std::ifstream in(input);
        if (!in)
            throw SpecError("cannot open input \"" + input + "\"");
        c = detect_stream(in, schema, det, std::cout, &std::cerr);
    }
    std::cerr << "packets_seen: " << c.packets_seen << '\n'
              << "malformed_skipped: " << c.malformed_skipped << '\n'
              << "windows_classified: " << c.windows_classified << '\n'
              << "attacks_flagged: " << c.attacks_flagged << '\n'
              << "unknown_categories: " << c.unknown_categories << '\n';
    return 0;
}

int cmd_bench(const GlobalArgs& g, std::string model_path, std::string windows,
              std::string spec_path, double period_s) {
    RunConfig cfg = resolve_config(g);
    if (model_path.empty())
        model_path = out_path(cfg, "model.edm").string();
    if (windows.empty())
        windows = out_path(cfg, "windows.edw").string();
    if (spec_path.empty())
        spec_path = out_path(cfg, "feature_spec.json").string();

    ModelParams m = load_model(model_path);
    FeatureSpec spec = load_feature_spec(spec_path);
    WindowSet ws = load_window_archive(windows);
    check_digest(m, spec);

    ResourceMonitor mon(period_s);
    MetricsReport report;
    mon.start();
    double wall = time_run(
        [&] { report = evaluate_model(m, ws, m.config.threshold, cfg.threads); });
    mon.stop();

    ensure_out_dir(cfg);
    auto csv = out_path(cfg, "resources.csv");
    {
        std::ofstream os(csv, std::ios::binary);
        if (!os)
            throw SpecError("cannot open \"" + csv.string() + "\" for writing");
        write_monitor_csv(mon.samples(), os);
    }
    MonitorSummary s = mon.summary();
    write_text_file(out_path(cfg, "bench.json"), monitor_summary_json(s) + "\n");

    std::cout << "windows: " << ws.count() << '\n';
    std::printf("wall_time_s: %.3f\n", wall);
    std::printf("windows_per_s: %.1f\n",
                wall > 0.0 ? static_cast<double>(ws.count()) / wall : 0.0);
    for (std::size_t c = 0; c < s.mean_cpu_per_core.size(); ++c)
        std::printf("cpu_core%zu_mean_percent: %.1f  max_percent: %.1f\n", c,
                    s.mean_cpu_per_core[c], s.max_cpu_per_core[c]);
    std::printf("resident_mean_bytes: %.0f\nresident_max_bytes: %.0f\n", s.mean_resident_bytes,
                s.max_resident_bytes);
    std::cout << "samples: " << s.samples << '\n' << "resources: " << csv.string() << '\n';
    return 0;
}

int cmd_config(const GlobalArgs& g, bool defaults) {
    if (defaults) {
        std::cout << run_config_to_json(default_run_config()).dump(2) << '\n';
        return 0;
    }
    RunConfig cfg = resolve_config(g);
    std::cout << run_config_to_json(cfg).dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-side streaming DDoS detection over sliding packet windows"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--config", g.config_path, "JSON run configuration file");
    app.add_option("--set", g.overrides, "Override a config key: key.path=value")
        ->allow_extra_args(false);
    std::uint64_t seed_val = 0;
    int threads_val = 0;
    std::string out_val;
    auto* seed_opt = app.add_option("--seed", seed_val, "Random seed");
    auto* threads_opt = app.add_option("--threads", threads_val, "Evaluation worker threads");
    auto* out_opt = app.add_option("--out", out_val, "Output directory");

    auto* pre = app.add_subcommand("preprocess",
                                   "Encode packets and write the window archive + feature spec");
    std::string pre_input;
    pre->add_option("--input", pre_input, "Packet CSV (overrides config; empty = generated)");

    auto* train = app.add_subcommand("train", "Train a model on a window archive");
    std::string tr_windows, tr_spec, tr_model;
    train->add_option("--windows", tr_windows, "Window archive path");
    train->add_option("--spec", tr_spec, "Feature spec path");
    train->add_option("--model-out", tr_model, "Trained model destination");

    auto* eval = app.add_subcommand("eval", "Score a window archive and report metrics");
    std::string ev_model, ev_windows, ev_spec, ev_compare;
    eval->add_option("--model", ev_model, "Model file");
    eval->add_option("--windows", ev_windows, "Window archive path");
    eval->add_option("--spec", ev_spec, "Feature spec path");
    eval->add_option("--compare", ev_compare, "Second model file for a parameter-count table");

    auto* detect = app.add_subcommand("detect", "Stream packets to NDJSON verdicts");
    std::string de_model, de_spec, de_input;
    detect->add_option("--model", de_model, "Model file");
    detect->add_option("--spec", de_spec, "Feature spec path");
    detect->add_option("--input", de_input, "Packet CSV path, or - for standard input")
        ->required();

    auto* bench = app.add_subcommand("bench", "Run the evaluation workload under the monitor");
    std::string be_model, be_windows, be_spec;
    double be_period = 0.25;
    bench->add_option("--model", be_model, "Model file");
    bench->add_option("--windows", be_windows, "Window archive path");
    bench->add_option("--spec", be_spec, "Feature spec path");
    bench->add_option("--period", be_period, "Sampling period in seconds");

    auto* conf = app.add_subcommand("config", "Print the resolved configuration");
    bool conf_defaults = false;
    conf->add_flag("--defaults", conf_defaults, "Print built-in defaults and exit");

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count())
        g.seed = seed_val;
    if (threads_opt->count())
        g.threads = threads_val;
    if (out_opt->count())
        g.out = out_val;

    try {
        if (pre->parsed())
            return cmd_preprocess(g, pre_input);
        if (train->parsed())
            return cmd_train(g, tr_windows, tr_spec, tr_model);
        if (eval->parsed())
            return cmd_eval(g, ev_model, ev_windows, ev_spec, ev_compare);
        if (detect->parsed())
            return cmd_detect(g, de_model, de_spec, de_input);
        if (bench->parsed())
            return cmd_bench(g, be_model, be_windows, be_spec, be_period);
        if (conf->parsed())
            return cmd_config(g, conf_defaults);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
