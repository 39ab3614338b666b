#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stockpick/dataset.hpp"
#include "stockpick/svm.hpp"

namespace stockpick::evaluate {

struct ConfusionSummary {
    int tp = 0, fp = 0, fn = 0, tn = 0;  // positive class = bullish (+1)
    int total() const { return tp + fp + fn + tn; }
    double bullish_accuracy() const;  // tp / (tp + fn)
    double bearish_accuracy() const;  // tn / (tn + fp)
    double accuracy() const;          // (tp + tn) / total
};

ConfusionSummary confusion_matrix(const std::vector<int>& predicted,
                                  const std::vector<int>& actual);

/// Equal-weight mean return of the stocks predicted bullish. Throws
/// "EmptyPortfolio" when nothing is predicted +1.
double portfolio_return(const std::vector<int>& predicted, const std::vector<double>& returns);

struct RealizationResult {
    int index = 0;
    std::uint64_t seed = 0;
    ConfusionSummary training;    // holdout rows of the training pool
    ConfusionSummary prediction;  // prediction-year stocks
    double portfolio_return = 0.0;
    double market_return = 0.0;
    double excess_return = 0.0;  // portfolio - market
    bool degenerate = false;     // empty portfolio or solver failure
    std::string note;
};

struct HistogramBin {
    double lo = 0.0, hi = 0.0;
    int count = 0;
};

struct BacktestReport {
    std::vector<RealizationResult> realizations;
    int included = 0;  // non-degenerate count backing the aggregates
    double mean_prediction_accuracy = 0.0;
    double mean_training_accuracy = 0.0;
    double mean_portfolio_return = 0.0;
    double min_portfolio_return = 0.0;
    double max_portfolio_return = 0.0;
    double mean_excess_return = 0.0;
    int positive_excess_count = 0;
    double market_reference = 0.0;       // mean return of all stocks
    double all_bullish_reference = 0.0;  // mean return of truly bullish stocks
    double all_bearish_reference = 0.0;
    std::vector<HistogramBin> histogram;
    std::uint64_t master_seed = 0;
};

/// Everything a realization needs: the training pool and the prediction-year
/// cross-section with its realized outcomes.
struct BacktestInputs {
    dataset::DesignMatrix train;
    dataset::LabelVector train_labels;
    dataset::DesignMatrix prediction;
    std::vector<int> actual_labels;      // per prediction row
    std::vector<double> actual_returns;  // relative returns per prediction row
};

struct BacktestConfig {
    double cardinality_ratio = 0.9;
    svm::SvmConfig svm;
    svm::KernelParams kernel;  // used when grid search is off
    bool use_grid_search = true;
    std::vector<double> sigma_grid;  // empty = defaults
    std::vector<double> c_grid;      // empty = defaults
};

/// Seeded realization study: hyperparameters fixed once (grid search on a
/// master-seed-derived partition when enabled), then one train/evaluate cycle
/// per derived seed. Deterministic given master_seed.
BacktestReport run_realizations(const BacktestInputs& inputs, const BacktestConfig& cfg,
                                int realization_count, std::uint64_t master_seed);

struct SweepRow {
    double ratio = 0.0;
    double min_error = 0.0;   // minimum holdout error across realizations
    double mean_error = 0.0;
};

std::vector<SweepRow> sweep_cardinality(const BacktestInputs& inputs, const BacktestConfig& cfg,
                                        const std::vector<double>& ratios,
                                        int realizations_per_ratio, std::uint64_t master_seed);

std::string report_to_json(const BacktestReport& report);
std::string histogram_to_csv(const BacktestReport& report);  // bin_lo,bin_hi,count
std::string sweep_to_csv(const std::vector<SweepRow>& rows);  // ratio,min_error,mean_error

}  // namespace stockpick::evaluate
