#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "edet/csv.hpp"
#include "edet/synthetic.hpp"
#include "helpers.hpp"

using namespace edet;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the installed binary through the shell, capturing both streams.
RunResult run_cli(const testutil::TempDir& tmp, const std::string& args,
                  const std::string& stdin_file = "") {
    std::string out_path = tmp.file("cli_stdout.txt");
    std::string err_path = tmp.file("cli_stderr.txt");
    std::string cmd = std::string(EDGEDETECT_BIN) + " " + args;
    if (!stdin_file.empty())
        cmd += " < " + stdin_file;
    cmd += " > " + out_path + " 2> " + err_path;
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = rc == -1 ? -1 : WEXITSTATUS(rc);
    r.out = testutil::read_text(out_path);
    r.err = testutil::read_text(err_path);
    return r;
}

std::string out_dir(const testutil::TempDir& tmp) { return tmp.file("out"); }

} // namespace

TEST_CASE("preprocess on synthetic traffic reports the window arithmetic") {
    testutil::TempDir tmp;
    auto r = run_cli(tmp, "preprocess --set synthetic.n_packets=1000 --set data.window=20 --out " +
                              out_dir(tmp));
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("packets: 1000") != std::string::npos);
    CHECK(r.out.find("windows: 981") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.file("out") + "/windows.edw"));
    CHECK(std::filesystem::exists(tmp.file("out") + "/feature_spec.json"));
}

TEST_CASE("preprocess is byte-for-byte reproducible") {
    testutil::TempDir tmp;
    std::string a = tmp.file("a");
    std::string b = tmp.file("b");
    REQUIRE(run_cli(tmp, "preprocess --set synthetic.n_packets=500 --out " + a).exit_code == 0);
    REQUIRE(run_cli(tmp, "preprocess --set synthetic.n_packets=500 --out " + b).exit_code == 0);
    CHECK(testutil::read_bytes(a + "/windows.edw") == testutil::read_bytes(b + "/windows.edw"));
    CHECK(testutil::read_text(a + "/feature_spec.json") ==
          testutil::read_text(b + "/feature_spec.json"));
}

TEST_CASE("missing input file fails loudly") {
    testutil::TempDir tmp;
    auto r = run_cli(tmp, "preprocess --input " + tmp.file("nope.csv") + " --out " +
                              out_dir(tmp));
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("unknown subcommand and bad override fail loudly") {
    testutil::TempDir tmp;
    CHECK(run_cli(tmp, "frobnicate").exit_code != 0);
    auto r = run_cli(tmp, "config --set no.such.key=1");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("config --defaults prints parseable json") {
    testutil::TempDir tmp;
    auto r = run_cli(tmp, "config --defaults");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.contains("data"));
    CHECK(j.contains("model"));
    CHECK(j.contains("train"));
    CHECK(j["data"]["window"].get<int>() >= 1);
}

TEST_CASE("overrides show up in the resolved config") {
    testutil::TempDir tmp;
    auto r = run_cli(tmp, "config --set model.hidden=32 --set train.epochs=3 --seed 77");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["model"]["hidden"].get<int>() == 32);
    CHECK(j["train"]["epochs"].get<int>() == 3);
    CHECK(j["seed"].get<std::uint64_t>() == 77);
}

TEST_CASE("preprocess, train, eval, detect round-trip end to end") {
    testutil::TempDir tmp;
    std::string base = " --set synthetic.n_packets=900 --set data.window=10"
                       " --set model.hidden=8 --set model.dense=8"
                       " --set model.threshold=0.5 --set train.epochs=4 --out " +
                       out_dir(tmp);

    REQUIRE(run_cli(tmp, "preprocess" + base).exit_code == 0);
    auto tr = run_cli(tmp, "train" + base);
    REQUIRE(tr.exit_code == 0);
    CHECK(tr.out.find("best_epoch:") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.file("out") + "/model.edm"));
    CHECK(std::filesystem::exists(tmp.file("out") + "/history.json"));

    auto ev = run_cli(tmp, "eval" + base);
    REQUIRE(ev.exit_code == 0);
    auto j = nlohmann::json::parse(ev.out);
    for (const char* k :
         {"cell", "accuracy", "loss", "precision", "recall", "f1", "auc", "kappa",
          "confusion", "test_wall_time_s"})
        CHECK(j.contains(k));
    CHECK(j["accuracy"].get<double>() > 0.9);
    CHECK(testutil::read_text(tmp.file("out") + "/metrics.json") == ev.out);

    std::string csv_path = tmp.file("live.csv");
    {
        auto recs = generate_synthetic(60, 0.5, 99);
        Schema with_header = synthetic_schema();
        with_header.has_header = true; // the default ingest config expects one
        std::ofstream f(csv_path);
        write_records_csv(recs, with_header, f);
    }
    auto det = run_cli(tmp, "detect --input " + csv_path + base);
    REQUIRE(det.exit_code == 0);
    CHECK(det.err.find("packets_seen: 60") != std::string::npos);
    CHECK(det.err.find("windows_classified: 51") != std::string::npos);
    std::istringstream verdicts(det.out);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(verdicts, line)) {
        ++lines;
        auto v = nlohmann::json::parse(line);
        CHECK(v.contains("index"));
        CHECK(v.contains("p_attack"));
        CHECK(v.contains("verdict"));
    }
    CHECK(lines == 51);

    auto piped = run_cli(tmp, "detect --input -" + base, csv_path);
    REQUIRE(piped.exit_code == 0);
    CHECK(piped.out == det.out);

    auto bench = run_cli(tmp, "bench" + base);
    REQUIRE(bench.exit_code == 0);
    CHECK(bench.out.find("windows: 891") != std::string::npos);
    CHECK(bench.out.find("wall_time_s:") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.file("out") + "/resources.csv"));
    CHECK(std::filesystem::exists(tmp.file("out") + "/bench.json"));
}

TEST_CASE("a stale model is refused after the features are refit") {
    testutil::TempDir tmp;
    std::string base = " --set data.window=10 --set model.hidden=4 --set model.dense=4"
                       " --set train.epochs=1 --out " +
                       out_dir(tmp);

    REQUIRE(run_cli(tmp, "preprocess --set synthetic.n_packets=400" + base).exit_code == 0);
    REQUIRE(run_cli(tmp, "train --set synthetic.n_packets=400" + base).exit_code == 0);
    // Refit the spec from different traffic; the stored model no longer matches.
    REQUIRE(run_cli(tmp, "preprocess --set synthetic.n_packets=400 --seed 123" + base).exit_code ==
            0);
    auto ev = run_cli(tmp, "eval --set synthetic.n_packets=400 --seed 123" + base);
    CHECK(ev.exit_code != 0);
    CHECK(ev.err.find("feature spec") != std::string::npos);
}

TEST_CASE("eval --compare prints the size table on stderr") {
    testutil::TempDir tmp;
    std::string base = " --set synthetic.n_packets=500 --set data.window=10"
                       " --set model.hidden=8 --set model.dense=8 --set train.epochs=2 --out " +
                       out_dir(tmp);
    REQUIRE(run_cli(tmp, "preprocess" + base).exit_code == 0);
    REQUIRE(run_cli(tmp, "train" + base).exit_code == 0);

    std::string other = out_dir(tmp) + "2";
    std::string base2 = " --set synthetic.n_packets=500 --set data.window=10"
                        " --set model.cell=GRU --set model.rnn_layers=4 --set model.hidden=8"
                        " --set model.dense=8 --set train.epochs=2 --out " +
                        other;
    REQUIRE(run_cli(tmp, "preprocess" + base2).exit_code == 0);
    REQUIRE(run_cli(tmp, "train" + base2).exit_code == 0);

    auto ev = run_cli(tmp, "eval --compare " + other + "/model.edm" + base);
    REQUIRE(ev.exit_code == 0);
    CHECK(nlohmann::json::parse(ev.out).contains("auc"));
    CHECK(ev.err.find("recurrent") != std::string::npos);
    CHECK(ev.err.find("ratio") != std::string::npos);
}
