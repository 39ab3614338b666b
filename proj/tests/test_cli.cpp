#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stockpick/dataset.hpp"
#include "stockpick/evaluate.hpp"
#include "stockpick/ingest.hpp"
#include "stockpick/preprocess.hpp"
#include "stockpick/svm.hpp"

namespace fs = std::filesystem;
using namespace stockpick;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "stockpick_cli_test";

int run_cli(const std::string& args) {
    std::string cmd = std::string(STOCKPICK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::trunc | std::ios::binary) << content;
}

// One shared small universe plus a config pointing at it.
struct Workspace {
    fs::path dir = kRoot;
    fs::path data = kRoot / "data";
    fs::path cfg = kRoot / "cfg.json";

    Workspace() {
        fs::remove_all(dir);
        fs::create_directories(dir);
        REQUIRE(run_cli("synth --seed 7 --out " + data.string() +
                        " --set synth.n_stocks=16 --set synth.n_features=4"
                        " --set synth.noise_sigma=0.01") == 0);
        write(cfg, R"({
  "paths": {
    "fundamentals": ")" + (data / "fundamentals.csv").string() + R"(",
    "prices": ")" + (data / "prices.csv").string() + R"(",
    "index": ")" + (data / "index.csv").string() + R"(",
    "meta": ")" + (data / "meta.csv").string() + R"(",
    "announcements": ")" + (data / "announcements.csv").string() + R"("
  },
  "grid_search": {"sigma": [2.0, 4.0], "c": [0.5, 1.0]},
  "backtest": {"realization_count": 4},
  "sweep": {"realizations_per_ratio": 3}
})");
    }

    std::string base_args(const std::string& out) const {
        return "--config " + cfg.string() + " --out " + (dir / out).string();
    }
};

Workspace& workspace() {
    static Workspace ws;
    return ws;
}

}  // namespace

TEST_CASE("synth output is deterministic for a fixed seed") {
    auto& ws = workspace();
    REQUIRE(run_cli("synth --seed 7 --out " + (ws.dir / "data2").string() +
                    " --set synth.n_stocks=16 --set synth.n_features=4"
                    " --set synth.noise_sigma=0.01") == 0);
    for (const char* name :
         {"fundamentals.csv", "prices.csv", "index.csv", "meta.csv", "announcements.csv",
          "truth.csv", "manifest.json"}) {
        CHECK(slurp(ws.data / name) == slurp(ws.dir / "data2" / name));
    }
    SUBCASE("and changes with the seed") {
        REQUIRE(run_cli("synth --seed 8 --out " + (ws.dir / "data3").string() +
                        " --set synth.n_stocks=16 --set synth.n_features=4"
                        " --set synth.noise_sigma=0.01") == 0);
        CHECK(slurp(ws.data / "fundamentals.csv") != slurp(ws.dir / "data3" / "fundamentals.csv"));
    }
}

TEST_CASE("backtest runs are byte-identical and leave inputs untouched") {
    auto& ws = workspace();
    auto before = slurp(ws.data / "fundamentals.csv") + slurp(ws.data / "prices.csv");
    REQUIRE(run_cli("backtest " + ws.base_args("bt1")) == 0);
    REQUIRE(run_cli("backtest " + ws.base_args("bt2")) == 0);
    for (const char* name : {"report.json", "histogram.csv", "manifest.json"}) {
        CHECK(slurp(ws.dir / "bt1" / name) == slurp(ws.dir / "bt2" / name));
    }
    CHECK(before == slurp(ws.data / "fundamentals.csv") + slurp(ws.data / "prices.csv"));
}

TEST_CASE("sweep CSV matches direct module calls with the same config and seed") {
    auto& ws = workspace();
    REQUIRE(run_cli("sweep " + ws.base_args("sw")) == 0);

    // The same pipeline, assembled in-process.
    auto panel = ingest::load_fundamentals((ws.data / "fundamentals.csv").string());
    preprocess::PreprocessConfig pcfg;
    panel = preprocess::run_preprocess(panel, pcfg).panel;
    auto prices = ingest::load_prices((ws.data / "prices.csv").string(),
                                      (ws.data / "index.csv").string());
    auto announcements = dataset::AnnouncementBook::load((ws.data / "announcements.csv").string());
    dataset::WindowSpec window;
    window.prediction_year = panel.years().back() + 1;

    evaluate::BacktestInputs inputs;
    auto [X, y] = dataset::build_training_set(panel, prices, announcements, window);
    inputs.train = std::move(X);
    inputs.train_labels = std::move(y);
    inputs.prediction = dataset::build_prediction_set(panel, window);
    for (const auto& [ticker, year] : inputs.prediction.row_index) {
        auto outcome = dataset::compute_label(prices, ticker, announcements.at(ticker, year - 1),
                                              window.horizon_months);
        inputs.actual_labels.push_back(outcome.label);
        inputs.actual_returns.push_back(outcome.relative_return);
    }

    evaluate::BacktestConfig cfg;
    cfg.sigma_grid = {2.0, 4.0};
    cfg.c_grid = {0.5, 1.0};
    auto rows = evaluate::sweep_cardinality(inputs, cfg, {0.5, 0.6, 0.7, 0.8, 0.9}, 3, 42);
    CHECK(slurp(ws.dir / "sw" / "sweep.csv") == evaluate::sweep_to_csv(rows));

    // Five data rows plus header.
    std::size_t lines = 0;
    for (char c : slurp(ws.dir / "sw" / "sweep.csv")) lines += c == '\n';
    CHECK(lines == 6);
}

TEST_CASE("train then predict emits one labeled row per stock") {
    auto& ws = workspace();
    REQUIRE(run_cli("train " + ws.base_args("tr")) == 0);
    REQUIRE(run_cli("predict " + ws.base_args("pr") + " --set paths.model=" +
                    (ws.dir / "tr" / "model.json").string()) == 0);
    auto text = slurp(ws.dir / "pr" / "predictions.csv");
    CHECK(text.rfind("ticker,year,decision_value,label\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 17);  // header + 16 stocks
}

TEST_CASE("preprocess --dump-stage writes the requested intermediate panel") {
    auto& ws = workspace();
    REQUIRE(run_cli("preprocess " + ws.base_args("pp") + " --dump-stage zscore_per_year") == 0);
    CHECK(fs::exists(ws.dir / "pp" / "processed.csv"));
    CHECK(fs::exists(ws.dir / "pp" / "stage_zscore_per_year.csv"));
    CHECK(fs::exists(ws.dir / "pp" / "manifest.json"));
    CHECK(run_cli("preprocess " + ws.base_args("ppx") + " --dump-stage no_such_stage") == 2);
}

TEST_CASE("error exit codes") {
    auto& ws = workspace();
    SUBCASE("predict without a model file is a config error") {
        CHECK(run_cli("predict " + ws.base_args("bad")) == 2);
    }
    SUBCASE("unknown config key is a config error") {
        CHECK(run_cli("backtest " + ws.base_args("bad") + " --set no.such.key=1") == 2);
    }
    SUBCASE("missing input path is a config error") {
        CHECK(run_cli("backtest --out " + (ws.dir / "bad").string()) == 2);
    }
    SUBCASE("malformed data file is a data error") {
        write(ws.dir / "broken.csv", "ticker,year,feature,value\nAAA,20x0,rev,1\n");
        CHECK(run_cli("preprocess " + ws.base_args("bad") + " --set paths.fundamentals=" +
                      (ws.dir / "broken.csv").string()) == 3);
    }
    SUBCASE("unknown flags are rejected") {
        CHECK(run_cli("backtest --no-such-flag") == 2);
    }
}
