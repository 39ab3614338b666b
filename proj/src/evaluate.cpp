#include "stockpick/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "stockpick/csv.hpp"
#include "stockpick/errors.hpp"
#include "stockpick/rng.hpp"

namespace stockpick::evaluate {

double ConfusionSummary::bullish_accuracy() const {
    int denom = tp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(tp) / denom;
}

double ConfusionSummary::bearish_accuracy() const {
    int denom = tn + fp;
    return denom == 0 ? 0.0 : static_cast<double>(tn) / denom;
}

double ConfusionSummary::accuracy() const {
    int denom = total();
    return denom == 0 ? 0.0 : static_cast<double>(tp + tn) / denom;
}

ConfusionSummary confusion_matrix(const std::vector<int>& predicted,
                                  const std::vector<int>& actual) {
    if (predicted.size() != actual.size()) {
        throw Error::data("LengthMismatch", "predicted/actual label counts differ");
    }
    if (predicted.empty()) throw Error::data("Empty", "no labels to compare");
    ConfusionSummary c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (actual[i] == 1) {
            predicted[i] == 1 ? ++c.tp : ++c.fn;
        } else {
            predicted[i] == 1 ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

double portfolio_return(const std::vector<int>& predicted, const std::vector<double>& returns) {
    if (predicted.size() != returns.size()) {
        throw Error::data("LengthMismatch", "predictions/returns differ in length");
    }
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 1) {
            sum += returns[i];
            ++count;
        }
    }
    if (count == 0) throw Error::data("EmptyPortfolio", "no stock predicted bullish");
    return sum / count;
}

namespace {

struct Hyperparams {
    svm::KernelParams kernel;
    double box_constraint = 0.8;
};

// Hyperparameters are fixed once per study (grid search on a dedicated
// master-seed-derived partition) and shared by all realizations.
Hyperparams resolve_hyperparams(const BacktestInputs& inputs, const BacktestConfig& cfg,
                                std::uint64_t master_seed) {
    Hyperparams hp{cfg.kernel, cfg.svm.box_constraint};
    if (!cfg.use_grid_search) return hp;
    auto partition = dataset::random_partition(static_cast<int>(inputs.train.values.rows()),
                                               cfg.cardinality_ratio, derive_seed(master_seed, 0));
    auto sigma_grid =
        cfg.sigma_grid.empty() ? svm::default_sigma_grid(inputs.train.values) : cfg.sigma_grid;
    auto c_grid = cfg.c_grid.empty() ? svm::default_c_grid() : cfg.c_grid;
    auto grid = svm::grid_search(inputs.train.values, inputs.train_labels.labels, partition,
                                 sigma_grid, c_grid, cfg.svm);
    hp.kernel = grid.best_kernel;
    hp.box_constraint = grid.best_c;
    return hp;
}

struct SubsetData {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

SubsetData subset_rows(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const std::vector<int>& rows) {
    SubsetData out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
        out.y[i] = y[static_cast<std::size_t>(rows[i])];
    }
    return out;
}

double mean_where(const std::vector<double>& values, const std::vector<int>& labels, int which) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (which == 0 || labels[i] == which) {
            sum += values[i];
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / count;
}

}  // namespace

BacktestReport run_realizations(const BacktestInputs& inputs, const BacktestConfig& cfg,
                                int realization_count, std::uint64_t master_seed) {
    if (realization_count < 1) {
        throw Error::config("ConfigInvalid", "realization count must be >= 1");
    }
    Hyperparams hp = resolve_hyperparams(inputs, cfg, master_seed);
    svm::SvmConfig solver_cfg = cfg.svm;
    solver_cfg.box_constraint = hp.box_constraint;

    BacktestReport report;
    report.master_seed = master_seed;
    report.market_reference = mean_where(inputs.actual_returns, inputs.actual_labels, 0);
    report.all_bullish_reference = mean_where(inputs.actual_returns, inputs.actual_labels, 1);
    report.all_bearish_reference = mean_where(inputs.actual_returns, inputs.actual_labels, -1);

    const int pool_rows = static_cast<int>(inputs.train.values.rows());
    for (int r = 1; r <= realization_count; ++r) {
        RealizationResult result;
        result.index = r;
        result.seed = derive_seed(master_seed, static_cast<std::uint64_t>(r));
        try {
            auto partition =
                dataset::random_partition(pool_rows, cfg.cardinality_ratio, result.seed);
            SubsetData train = subset_rows(inputs.train.values, inputs.train_labels.labels,
                                           partition.train_rows);
            SubsetData holdout = subset_rows(inputs.train.values, inputs.train_labels.labels,
                                             partition.holdout_rows);
            svm::TrainedModel model = svm::train(train.X, train.y, hp.kernel, solver_cfg);
            if (!model.converged) {
                result.degenerate = true;
                result.note = "NotConverged";
            }
            result.training = confusion_matrix(svm::predict_labels(model, holdout.X), holdout.y);
            auto predicted = svm::predict_labels(model, inputs.prediction.values);
            result.prediction = confusion_matrix(predicted, inputs.actual_labels);
            result.market_return = report.market_reference;
            result.portfolio_return = portfolio_return(predicted, inputs.actual_returns);
            result.excess_return = result.portfolio_return - result.market_return;
        } catch (const Error& e) {
            result.degenerate = true;
            result.note = e.name();
        }
        report.realizations.push_back(std::move(result));
    }

    double min_ret = std::numeric_limits<double>::infinity();
    double max_ret = -std::numeric_limits<double>::infinity();
    for (const auto& r : report.realizations) {
        if (r.degenerate) continue;
        ++report.included;
        report.mean_prediction_accuracy += r.prediction.accuracy();
        report.mean_training_accuracy += r.training.accuracy();
        report.mean_portfolio_return += r.portfolio_return;
        report.mean_excess_return += r.excess_return;
        if (r.excess_return > 0.0) ++report.positive_excess_count;
        min_ret = std::min(min_ret, r.portfolio_return);
        max_ret = std::max(max_ret, r.portfolio_return);
    }
    if (report.included > 0) {
        report.mean_prediction_accuracy /= report.included;
        report.mean_training_accuracy /= report.included;
        report.mean_portfolio_return /= report.included;
        report.mean_excess_return /= report.included;
        report.min_portfolio_return = min_ret;
        report.max_portfolio_return = max_ret;

        int bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(report.included))));
        double width = (max_ret - min_ret) / bins;
        if (width == 0.0) {
            report.histogram.push_back({min_ret, max_ret, report.included});
        } else {
            for (int b = 0; b < bins; ++b) {
                report.histogram.push_back({min_ret + b * width, min_ret + (b + 1) * width, 0});
            }
            for (const auto& r : report.realizations) {
                if (r.degenerate) continue;
                int b = std::min(bins - 1,
                                 static_cast<int>((r.portfolio_return - min_ret) / width));
                ++report.histogram[static_cast<std::size_t>(b)].count;
            }
        }
    }
    return report;
}

std::vector<SweepRow> sweep_cardinality(const BacktestInputs& inputs, const BacktestConfig& cfg,
                                        const std::vector<double>& ratios,
                                        int realizations_per_ratio, std::uint64_t master_seed) {
    for (double ratio : ratios) {
        if (ratio <= 0.0 || ratio >= 1.0) {
            throw Error::config("InvalidRatio", "sweep ratios must lie in (0,1)");
        }
    }
    Hyperparams hp = resolve_hyperparams(inputs, cfg, master_seed);
    svm::SvmConfig solver_cfg = cfg.svm;
    solver_cfg.box_constraint = hp.box_constraint;

    const int pool_rows = static_cast<int>(inputs.train.values.rows());
    std::vector<SweepRow> rows;
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
        std::uint64_t ratio_seed = derive_seed(master_seed, 0x10000ull + ri);
        SweepRow row;
        row.ratio = ratios[ri];
        double min_error = 1.0;
        double sum_error = 0.0;
        for (int r = 1; r <= realizations_per_ratio; ++r) {
            auto partition = dataset::random_partition(
                pool_rows, ratios[ri], derive_seed(ratio_seed, static_cast<std::uint64_t>(r)));
            SubsetData train = subset_rows(inputs.train.values, inputs.train_labels.labels,
                                           partition.train_rows);
            SubsetData holdout = subset_rows(inputs.train.values, inputs.train_labels.labels,
                                             partition.holdout_rows);
            svm::TrainedModel model = svm::train(train.X, train.y, hp.kernel, solver_cfg);
            auto predicted = svm::predict_labels(model, holdout.X);
            double error = 1.0 - confusion_matrix(predicted, holdout.y).accuracy();
            min_error = std::min(min_error, error);
            sum_error += error;
        }
        row.min_error = min_error;
        row.mean_error = sum_error / realizations_per_ratio;
        rows.push_back(row);
    }
    return rows;
}

namespace {

nlohmann::ordered_json confusion_to_json(const ConfusionSummary& c) {
    return {{"tp", c.tp},
            {"fp", c.fp},
            {"fn", c.fn},
            {"tn", c.tn},
            {"bullish_accuracy", c.bullish_accuracy()},
            {"bearish_accuracy", c.bearish_accuracy()},
            {"accuracy", c.accuracy()}};
}

}  // namespace

std::string report_to_json(const BacktestReport& report) {
    nlohmann::ordered_json j;
    j["master_seed"] = report.master_seed;
    j["realization_count"] = report.realizations.size();
    j["included"] = report.included;
    j["aggregates"] = {{"mean_prediction_accuracy", report.mean_prediction_accuracy},
                       {"mean_training_accuracy", report.mean_training_accuracy},
                       {"mean_portfolio_return", report.mean_portfolio_return},
                       {"min_portfolio_return", report.min_portfolio_return},
                       {"max_portfolio_return", report.max_portfolio_return},
                       {"mean_excess_return", report.mean_excess_return},
                       {"positive_excess_count", report.positive_excess_count}};
    j["references"] = {{"market", report.market_reference},
                       {"all_bullish", report.all_bullish_reference},
                       {"all_bearish", report.all_bearish_reference}};
    nlohmann::ordered_json bins = nlohmann::ordered_json::array();
    for (const auto& b : report.histogram) {
        bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
    }
    j["histogram"] = bins;
    nlohmann::ordered_json reals = nlohmann::ordered_json::array();
    for (const auto& r : report.realizations) {
        nlohmann::ordered_json jr;
        jr["index"] = r.index;
        jr["seed"] = r.seed;
        jr["degenerate"] = r.degenerate;
        if (!r.note.empty()) jr["note"] = r.note;
        if (!r.degenerate || r.note == "NotConverged") {
            jr["training"] = confusion_to_json(r.training);
            jr["prediction"] = confusion_to_json(r.prediction);
            jr["portfolio_return"] = r.portfolio_return;
            jr["market_return"] = r.market_return;
            jr["excess_return"] = r.excess_return;
        }
        reals.push_back(std::move(jr));
    }
    j["realizations"] = reals;
    return j.dump(2) + "\n";
}

std::string histogram_to_csv(const BacktestReport& report) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    for (const auto& b : report.histogram) {
        out << csv::format_double(b.lo) << ',' << csv::format_double(b.hi) << ',' << b.count
            << '\n';
    }
    return out.str();
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "ratio,min_error,mean_error\n";
    for (const auto& r : rows) {
        out << csv::format_double(r.ratio) << ',' << csv::format_double(r.min_error) << ','
            << csv::format_double(r.mean_error) << '\n';
    }
    return out.str();
}

}  // namespace stockpick::evaluate
