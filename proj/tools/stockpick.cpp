// Command-line front end for the stockpick pipeline. One JSON config document
// drives every subcommand; --set key=value overrides nested fields by dotted
// path. All outputs are written atomically and each run leaves a manifest
// (config hash, seed, versions) beside them.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "stockpick/csv.hpp"
#include "stockpick/dataset.hpp"
#include "stockpick/errors.hpp"
#include "stockpick/evaluate.hpp"
#include "stockpick/ingest.hpp"
#include "stockpick/preprocess.hpp"
#include "stockpick/rng.hpp"
#include "stockpick/svm.hpp"
#include "stockpick/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stockpick;

namespace {

constexpr const char* kVersion = "1.0.0";

ordered_json default_config() {
    return ordered_json{
        {"master_seed", 42},
        {"out_dir", "out"},
        {"paths",
         {{"fundamentals", ""},
          {"prices", ""},
          {"index", ""},
          {"meta", ""},
          {"announcements", ""},
          {"model", ""}}},
        {"universe",
         {{"enabled", false},
          {"min_coverage", 0.5},
          {"min_years", 10},
          {"require_active", true},
          {"drop_smallest_cap", 152}}},
        {"preprocess",
         {{"enabled", true},
          {"missing_threshold", 0.05},
          {"dct_width", 7},
          {"pca_drop_fraction", 0.15},
          {"apply_base_year", true}}},
        {"window",
         {{"lookback", 5}, {"train_years", 5}, {"horizon_months", 3}, {"prediction_year", 0}}},
        {"svm",
         {{"solver", "least_squares"},
          {"box_constraint", 0.8},
          {"kkt_violation_fraction", 0.1},
          {"kkt_tolerance", 1e-3},
          {"max_passes", 2000}}},
        {"kernel", {{"sigma", 1.0}}},
        {"grid_search",
         {{"enabled", true}, {"sigma", ordered_json::array()}, {"c", ordered_json::array()}}},
        {"backtest", {{"cardinality_ratio", 0.9}, {"realization_count", 100}}},
        {"sweep",
         {{"ratios", {0.5, 0.6, 0.7, 0.8, 0.9}}, {"realizations_per_ratio", 20}}},
        {"synth",
         {{"n_stocks", 100},
          {"n_years", 12},
          {"n_features", 12},
          {"signal_strength", 0.05},
          {"noise_sigma", 0.0},
          {"missing_rate", 0.0},
          {"first_year", 2002}}},
    };
}

// Recursive merge of a user document into the defaults; unknown keys and
// object/scalar type mismatches are configuration errors.
void merge_config(ordered_json& base, const ordered_json& user, const std::string& prefix) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) {
            throw Error::config("ConfigInvalid", "unknown config key '" + path + "'");
        }
        ordered_json& slot = base[it.key()];
        if (slot.is_object()) {
            if (!it.value().is_object()) {
                throw Error::config("ConfigInvalid", "'" + path + "' must be an object");
            }
            merge_config(slot, it.value(), path);
        } else {
            slot = it.value();
        }
    }
}

void apply_override(ordered_json& config, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error::config("ConfigInvalid", "--set expects key=value, got '" + assignment + "'");
    }
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    ordered_json* slot = &config;
    std::istringstream parts(key);
    std::string part;
    while (std::getline(parts, part, '.')) {
        if (!slot->is_object() || !slot->contains(part)) {
            throw Error::config("ConfigInvalid", "unknown config key '" + key + "'");
        }
        slot = &(*slot)[part];
    }
    ordered_json parsed = ordered_json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // bare strings need no quotes
    if (slot->is_object()) {
        throw Error::config("ConfigInvalid", "'" + key + "' is an object, not a value");
    }
    *slot = parsed;
}

ordered_json load_config(const std::string& config_path) {
    ordered_json config = default_config();
    if (config_path.empty()) return config;
    std::ifstream in(config_path);
    if (!in) throw Error::config("ConfigInvalid", "cannot read config file " + config_path);
    ordered_json user = ordered_json::parse(in, nullptr, false);
    if (user.is_discarded() || !user.is_object()) {
        throw Error::config("ConfigInvalid", "config file is not a JSON object");
    }
    merge_config(config, user, "");
    return config;
}

template <typename T>
T field(const ordered_json& config, const std::string& dotted) {
    const ordered_json* slot = &config;
    std::istringstream parts(dotted);
    std::string part;
    while (std::getline(parts, part, '.')) slot = &slot->at(part);
    try {
        return slot->get<T>();
    } catch (const ordered_json::exception&) {
        throw Error::config("ConfigInvalid", "bad value for '" + dotted + "'");
    }
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ull;
    }
    return hash;
}

// -- config extraction ------------------------------------------------------

preprocess::PreprocessConfig preprocess_config(const ordered_json& config) {
    preprocess::PreprocessConfig cfg;
    cfg.missing_threshold = field<double>(config, "preprocess.missing_threshold");
    cfg.dct_width = field<int>(config, "preprocess.dct_width");
    cfg.pca_drop_fraction = field<double>(config, "preprocess.pca_drop_fraction");
    cfg.apply_base_year = field<bool>(config, "preprocess.apply_base_year");
    return cfg;
}

svm::SvmConfig svm_config(const ordered_json& config) {
    svm::SvmConfig cfg;
    std::string solver = field<std::string>(config, "svm.solver");
    if (solver == "smo") cfg.solver = svm::Solver::SMO;
    else if (solver == "least_squares") cfg.solver = svm::Solver::LEAST_SQUARES;
    else throw Error::config("ConfigInvalid", "svm.solver must be 'smo' or 'least_squares'");
    cfg.box_constraint = field<double>(config, "svm.box_constraint");
    cfg.kkt_violation_fraction = field<double>(config, "svm.kkt_violation_fraction");
    cfg.kkt_tolerance = field<double>(config, "svm.kkt_tolerance");
    cfg.max_passes = field<int>(config, "svm.max_passes");
    return cfg;
}

dataset::WindowSpec window_spec(const ordered_json& config) {
    dataset::WindowSpec spec;
    spec.lookback = field<int>(config, "window.lookback");
    spec.train_years = field<int>(config, "window.train_years");
    spec.horizon_months = field<int>(config, "window.horizon_months");
    spec.prediction_year = field<int>(config, "window.prediction_year");
    return spec;
}

synth::SynthSpec synth_spec(const ordered_json& config) {
    synth::SynthSpec spec;
    spec.n_stocks = field<int>(config, "synth.n_stocks");
    spec.n_years = field<int>(config, "synth.n_years");
    spec.n_features = field<int>(config, "synth.n_features");
    spec.signal_strength = field<double>(config, "synth.signal_strength");
    spec.noise_sigma = field<double>(config, "synth.noise_sigma");
    spec.missing_rate = field<double>(config, "synth.missing_rate");
    spec.first_year = field<int>(config, "synth.first_year");
    spec.seed = field<std::uint64_t>(config, "master_seed");
    return spec;
}

evaluate::BacktestConfig backtest_config(const ordered_json& config) {
    evaluate::BacktestConfig cfg;
    cfg.cardinality_ratio = field<double>(config, "backtest.cardinality_ratio");
    cfg.svm = svm_config(config);
    cfg.kernel.sigma = field<double>(config, "kernel.sigma");
    cfg.use_grid_search = field<bool>(config, "grid_search.enabled");
    cfg.sigma_grid = field<std::vector<double>>(config, "grid_search.sigma");
    cfg.c_grid = field<std::vector<double>>(config, "grid_search.c");
    return cfg;
}

std::string required_path(const ordered_json& config, const std::string& key) {
    auto path = field<std::string>(config, "paths." + key);
    if (path.empty()) {
        throw Error::config("ConfigInvalid", "paths." + key + " is required for this command");
    }
    if (!fs::exists(path)) {
        throw Error::config("ConfigInvalid", "paths." + key + ": no such file " + path);
    }
    return path;
}

// -- pipeline assembly ------------------------------------------------------

struct Pipeline {
    FundamentalsPanel panel;
    ingest::PriceTable prices;
    dataset::AnnouncementBook announcements;
    dataset::WindowSpec window;
    std::vector<std::string> stage_log;
};

FundamentalsPanel load_panel(const ordered_json& config,
                             std::vector<std::string>* stage_log = nullptr,
                             std::vector<std::pair<std::string, FundamentalsPanel>>* stages =
                                 nullptr) {
    auto panel = ingest::load_fundamentals(required_path(config, "fundamentals"));
    if (field<bool>(config, "universe.enabled")) {
        auto meta = ingest::load_meta(required_path(config, "meta"), panel);
        ingest::UniverseRules rules;
        rules.min_coverage = field<double>(config, "universe.min_coverage");
        rules.min_years = field<int>(config, "universe.min_years");
        rules.require_active = field<bool>(config, "universe.require_active");
        rules.drop_smallest_cap = field<int>(config, "universe.drop_smallest_cap");
        panel = ingest::filter_universe(panel, meta, rules);
    }
    if (field<bool>(config, "preprocess.enabled")) {
        auto result = preprocess::run_preprocess(panel, preprocess_config(config), stages);
        panel = std::move(result.panel);
        if (stage_log) *stage_log = std::move(result.stage_log);
    }
    return panel;
}

Pipeline load_pipeline(const ordered_json& config) {
    Pipeline p;
    p.panel = load_panel(config, &p.stage_log);
    p.prices = ingest::load_prices(required_path(config, "prices"), required_path(config, "index"));
    p.announcements = dataset::AnnouncementBook::load(required_path(config, "announcements"));
    p.window = window_spec(config);
    if (p.window.prediction_year == 0) {
        // Default: predict the year after the panel ends.
        p.window.prediction_year = p.panel.years().back() + 1;
    }
    return p;
}

evaluate::BacktestInputs backtest_inputs(const Pipeline& p) {
    evaluate::BacktestInputs inputs;
    auto [X, y] = dataset::build_training_set(p.panel, p.prices, p.announcements, p.window);
    inputs.train = std::move(X);
    inputs.train_labels = std::move(y);
    inputs.prediction = dataset::build_prediction_set(p.panel, p.window);
    for (const auto& [ticker, year] : inputs.prediction.row_index) {
        auto outcome = dataset::compute_label(p.prices, ticker, p.announcements.at(ticker, year - 1),
                                              p.window.horizon_months);
        inputs.actual_labels.push_back(outcome.label);
        inputs.actual_returns.push_back(outcome.relative_return);
    }
    return inputs;
}

// Hyperparameters for `train`/`predict`, resolved the same way the backtest
// study does: one grid search on a master-seed-derived partition.
std::pair<svm::KernelParams, double> resolve_hyperparams(const ordered_json& config,
                                                         const evaluate::BacktestInputs& inputs) {
    svm::KernelParams kernel{field<double>(config, "kernel.sigma")};
    double c = field<double>(config, "svm.box_constraint");
    if (!field<bool>(config, "grid_search.enabled")) return {kernel, c};
    auto cfg = svm_config(config);
    auto master_seed = field<std::uint64_t>(config, "master_seed");
    auto partition = dataset::random_partition(static_cast<int>(inputs.train.values.rows()),
                                               field<double>(config, "backtest.cardinality_ratio"),
                                               derive_seed(master_seed, 0));
    auto sigma_grid = field<std::vector<double>>(config, "grid_search.sigma");
    auto c_grid = field<std::vector<double>>(config, "grid_search.c");
    if (sigma_grid.empty()) sigma_grid = svm::default_sigma_grid(inputs.train.values);
    if (c_grid.empty()) c_grid = svm::default_c_grid();
    auto result = svm::grid_search(inputs.train.values, inputs.train_labels.labels, partition,
                                   sigma_grid, c_grid, cfg);
    return {result.best_kernel, result.best_c};
}

// -- output plumbing --------------------------------------------------------

struct OutputSink {
    fs::path dir;
    std::vector<std::string> written;

    explicit OutputSink(const std::string& out_dir) : dir(out_dir) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error::config("ConfigInvalid", "cannot create output dir " + out_dir);
    }

    void write(const std::string& name, const std::string& content) {
        csv::write_file_atomic((dir / name).string(), content);
        written.push_back(name);
    }

    void manifest(const std::string& command, const ordered_json& config) {
        ordered_json m;
        m["command"] = command;
        // The hash covers the semantic configuration; where the outputs land
        // is not part of it.
        ordered_json hashed = config;
        hashed.erase("out_dir");
        m["config_hash"] = fnv1a(hashed.dump());
        m["master_seed"] = config.at("master_seed");
        m["versions"] = {{"stockpick", kVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                       std::to_string(EIGEN_MINOR_VERSION)},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
        m["outputs"] = written;
        csv::write_file_atomic((dir / "manifest.json").string(), m.dump(2) + "\n");
    }
};

// -- subcommands ------------------------------------------------------------

void cmd_synth(const ordered_json& config) {
    auto universe = synth::generate_universe(synth_spec(config));
    auto files = synth::to_csv(universe);
    OutputSink out(field<std::string>(config, "out_dir"));
    out.write("fundamentals.csv", files.fundamentals);
    out.write("prices.csv", files.prices);
    out.write("index.csv", files.index);
    out.write("meta.csv", files.meta);
    out.write("announcements.csv", files.announcements);
    std::ostringstream truth;
    truth << "ticker,year,score,relative_return,label\n";
    for (const auto& [key, outcome] : universe.truth) {
        truth << key.first << ',' << key.second << ',' << csv::format_double(outcome.score) << ','
              << csv::format_double(outcome.relative_return) << ',' << outcome.label << '\n';
    }
    out.write("truth.csv", truth.str());
    out.manifest("synth", config);
}

void cmd_preprocess(const ordered_json& config, const std::vector<std::string>& dump_stages) {
    std::vector<std::string> stage_log;
    std::vector<std::pair<std::string, FundamentalsPanel>> stages;
    auto panel = load_panel(config, &stage_log, dump_stages.empty() ? nullptr : &stages);
    OutputSink out(field<std::string>(config, "out_dir"));
    out.write("processed.csv", ingest::write_fundamentals_csv(panel));
    for (const auto& wanted : dump_stages) {
        bool found = false;
        for (const auto& [name, stage_panel] : stages) {
            if (name.substr(0, name.find(':')) == wanted) {
                out.write("stage_" + wanted + ".csv", ingest::write_fundamentals_csv(stage_panel));
                found = true;
                break;
            }
        }
        if (!found) throw Error::config("ConfigInvalid", "unknown stage '" + wanted + "'");
    }
    ordered_json log;
    log["stages"] = stage_log;
    out.write("stages.json", log.dump(2) + "\n");
    out.manifest("preprocess", config);
}

void cmd_train(const ordered_json& config) {
    auto pipeline = load_pipeline(config);
    auto inputs = backtest_inputs(pipeline);
    auto [kernel, c] = resolve_hyperparams(config, inputs);
    auto cfg = svm_config(config);
    cfg.box_constraint = c;
    auto model = svm::train(inputs.train.values, inputs.train_labels.labels, kernel, cfg);
    OutputSink out(field<std::string>(config, "out_dir"));
    out.write("model.json", svm::serialize_model(model));
    out.manifest("train", config);
}

void cmd_predict(const ordered_json& config) {
    auto model_path = field<std::string>(config, "paths.model");
    if (model_path.empty() || !fs::exists(model_path)) {
        throw Error::config("ConfigInvalid", "paths.model must point to a trained model file");
    }
    std::ifstream in(model_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto model = svm::deserialize_model(buffer.str());

    auto pipeline = load_pipeline(config);
    auto prediction = dataset::build_prediction_set(pipeline.panel, pipeline.window);
    std::ostringstream rows;
    rows << "ticker,year,decision_value,label\n";
    for (std::size_t r = 0; r < prediction.row_index.size(); ++r) {
        Eigen::VectorXd x = prediction.values.row(static_cast<Eigen::Index>(r)).transpose();
        double f = svm::decision_value(model, x);
        rows << prediction.row_index[r].first << ',' << prediction.row_index[r].second << ','
             << csv::format_double(f) << ',' << (f > 0 ? 1 : -1) << '\n';
    }
    OutputSink out(field<std::string>(config, "out_dir"));
    out.write("predictions.csv", rows.str());
    out.manifest("predict", config);
}

void cmd_backtest(const ordered_json& config) {
    auto pipeline = load_pipeline(config);
    auto inputs = backtest_inputs(pipeline);
    auto report = evaluate::run_realizations(inputs, backtest_config(config),
                                             field<int>(config, "backtest.realization_count"),
                                             field<std::uint64_t>(config, "master_seed"));
    OutputSink out(field<std::string>(config, "out_dir"));
    out.write("report.json", evaluate::report_to_json(report));
    out.write("histogram.csv", evaluate::histogram_to_csv(report));
    out.manifest("backtest", config);
}

void cmd_sweep(const ordered_json& config) {
    auto pipeline = load_pipeline(config);
    auto inputs = backtest_inputs(pipeline);
    auto rows = evaluate::sweep_cardinality(inputs, backtest_config(config),
                                            field<std::vector<double>>(config, "sweep.ratios"),
                                            field<int>(config, "sweep.realizations_per_ratio"),
                                            field<std::uint64_t>(config, "master_seed"));
    OutputSink out(field<std::string>(config, "out_dir"));
    out.write("sweep.csv", evaluate::sweep_to_csv(rows));
    out.manifest("sweep", config);
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Compute: return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stockpick: fundamentals-driven stock classification pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string seed_override;
    std::string out_override;
    std::vector<std::string> overrides;
    std::vector<std::string> dump_stages;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed_override, "override master_seed");
    app.add_option("--out", out_override, "override output directory");
    app.add_option("--set", overrides, "override a config field, dotted.key=value");

    // Fallthrough lets the global flags appear after the subcommand name.
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic universe")->fallthrough();
    auto* preprocess_cmd =
        app.add_subcommand("preprocess", "run the preprocessing pipeline")->fallthrough();
    preprocess_cmd->add_option("--dump-stage", dump_stages,
                               "also emit the panel after the named stage");
    auto* train_cmd =
        app.add_subcommand("train", "train an SVM on the training window")->fallthrough();
    auto* predict_cmd =
        app.add_subcommand("predict", "classify the prediction year")->fallthrough();
    auto* backtest_cmd =
        app.add_subcommand("backtest", "seeded realization study")->fallthrough();
    auto* sweep_cmd = app.add_subcommand("sweep", "cardinality-ratio sweep")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ordered_json config = load_config(config_path);
        if (!seed_override.empty()) apply_override(config, "master_seed=" + seed_override);
        if (!out_override.empty()) config["out_dir"] = out_override;
        for (const auto& assignment : overrides) apply_override(config, assignment);

        if (synth_cmd->parsed()) cmd_synth(config);
        else if (preprocess_cmd->parsed()) cmd_preprocess(config, dump_stages);
        else if (train_cmd->parsed()) cmd_train(config);
        else if (predict_cmd->parsed()) cmd_predict(config);
        else if (backtest_cmd->parsed()) cmd_backtest(config);
        else if (sweep_cmd->parsed()) cmd_sweep(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
