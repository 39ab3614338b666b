#include "stockpick/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stockpick/csv.hpp"
#include "stockpick/errors.hpp"
#include "stockpick/rng.hpp"

namespace stockpick::dataset {

void AnnouncementBook::add(const std::string& ticker, int fiscal_year, Date date) {
    if (!dates_.emplace(std::make_pair(ticker, fiscal_year), date).second) {
        throw Error::data("DuplicateCell", "duplicate announcement for " + ticker + "/" +
                                               std::to_string(fiscal_year));
    }
}

const Date& AnnouncementBook::at(const std::string& ticker, int fiscal_year) const {
    auto it = dates_.find({ticker, fiscal_year});
    if (it == dates_.end()) {
        throw Error::data("InsufficientPriceHistory",
                          "no announcement date for " + ticker + "/" + std::to_string(fiscal_year));
    }
    return it->second;
}

bool AnnouncementBook::contains(const std::string& ticker, int fiscal_year) const {
    return dates_.count({ticker, fiscal_year}) > 0;
}

AnnouncementBook AnnouncementBook::load(const std::string& path) {
    auto table = csv::read_file(path, {"ticker", "year", "announcement_date"});
    AnnouncementBook book;
    for (const auto& row : table.rows) {
        int year = static_cast<int>(csv::parse_int(row[1], path));
        book.add(row[0], year, Date::parse(row[2]));
    }
    return book;
}

std::string AnnouncementBook::to_csv() const {
    std::ostringstream out;
    out << "ticker,year,announcement_date\n";
    for (const auto& [key, date] : dates_) {
        out << key.first << ',' << key.second << ',' << date.to_string() << '\n';
    }
    return out.str();
}

namespace {

// Price at the nearest trading date on or after `when`.
double price_on_or_after(const std::vector<ingest::PricePoint>& series, Date when,
                         const std::string& what) {
    auto it = std::lower_bound(series.begin(), series.end(), when,
                               [](const ingest::PricePoint& p, const Date& d) {
                                   return p.date < d;
                               });
    if (it == series.end()) {
        throw Error::data("InsufficientPriceHistory",
                          what + ": no price on or after " + when.to_string());
    }
    return it->close;
}

}  // namespace

LabelOutcome compute_label(const ingest::PriceTable& prices, const std::string& ticker,
                           Date announcement, int horizon_months) {
    auto it = prices.by_ticker.find(ticker);
    if (it == prices.by_ticker.end() || it->second.empty()) {
        throw Error::data("InsufficientPriceHistory", "no prices for " + ticker);
    }
    Date end = announcement.add_months(horizon_months);

    double s0 = price_on_or_after(it->second, announcement, ticker);
    double s1 = price_on_or_after(it->second, end, ticker);
    double m0 = price_on_or_after(prices.index_series, announcement, "index");
    double m1 = price_on_or_after(prices.index_series, end, "index");

    double stock_return = s1 / s0 - 1.0;
    double market_return = m1 / m0 - 1.0;
    LabelOutcome out;
    out.relative_return = stock_return - market_return;
    out.label = out.relative_return > 0.0 ? 1 : -1;
    return out;
}

Eigen::VectorXd build_window(const FundamentalsPanel& panel, std::size_t stock, int year,
                             int lookback) {
    const std::size_t k = panel.n_features();
    Eigen::VectorXd window(static_cast<Eigen::Index>(k) * lookback);
    for (int lag = 1; lag <= lookback; ++lag) {
        int yi = panel.year_index(year - lag);
        if (yi < 0) {
            throw Error::data("InsufficientHistory",
                              "panel does not cover year " + std::to_string(year - lag));
        }
        for (std::size_t f = 0; f < k; ++f) {
            double v = panel.at(stock, static_cast<std::size_t>(yi), f);
            if (is_missing(v)) {
                throw Error::data("InsufficientHistory",
                                  "missing cell for " + panel.tickers()[stock] + " year " +
                                      std::to_string(year - lag));
            }
            window(static_cast<Eigen::Index>(lag - 1) * static_cast<Eigen::Index>(k) +
                   static_cast<Eigen::Index>(f)) = v;
        }
    }
    return window;
}

std::pair<DesignMatrix, LabelVector> build_training_set(const FundamentalsPanel& panel,
                                                        const ingest::PriceTable& prices,
                                                        const AnnouncementBook& announcements,
                                                        const WindowSpec& spec) {
    const int t = spec.prediction_year;
    const std::size_t n = panel.n_stocks();
    const std::size_t k = panel.n_features();
    const Eigen::Index rows = static_cast<Eigen::Index>(n) * spec.train_years;
    const Eigen::Index cols = static_cast<Eigen::Index>(k) * spec.lookback;

    DesignMatrix X;
    X.values.resize(rows, cols);
    X.row_index.reserve(static_cast<std::size_t>(rows));
    LabelVector y;
    y.labels.reserve(static_cast<std::size_t>(rows));
    y.relative_returns.reserve(static_cast<std::size_t>(rows));

    Eigen::Index row = 0;
    for (std::size_t s = 0; s < n; ++s) {
        // Label years t-1 down to t-M, matching the stacked block layout.
        for (int label_year = t - 1; label_year >= t - spec.train_years; --label_year) {
            X.values.row(row) = build_window(panel, s, label_year, spec.lookback).transpose();
            X.row_index.emplace_back(panel.tickers()[s], label_year);
            Date announcement = announcements.at(panel.tickers()[s], label_year - 1);
            LabelOutcome outcome =
                compute_label(prices, panel.tickers()[s], announcement, spec.horizon_months);
            y.labels.push_back(outcome.label);
            y.relative_returns.push_back(outcome.relative_return);
            ++row;
        }
    }
    return {std::move(X), std::move(y)};
}

DesignMatrix build_prediction_set(const FundamentalsPanel& panel, const WindowSpec& spec) {
    const std::size_t n = panel.n_stocks();
    DesignMatrix X;
    X.values.resize(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(panel.n_features()) * spec.lookback);
    X.row_index.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        X.values.row(static_cast<Eigen::Index>(s)) =
            build_window(panel, s, spec.prediction_year, spec.lookback).transpose();
        X.row_index.emplace_back(panel.tickers()[s], spec.prediction_year);
    }
    return X;
}

Partition random_partition(int row_count, double ratio, std::uint64_t seed) {
    if (ratio <= 0.0 || ratio >= 1.0) throw Error::config("InvalidRatio", "ratio must be in (0,1)");
    if (row_count < 2) throw Error::data("TooFewRows", "need at least 2 rows to partition");

    int train_size = static_cast<int>(std::floor(ratio * row_count + 0.5));  // round half up
    train_size = std::clamp(train_size, 1, row_count - 1);

    std::vector<int> order(static_cast<std::size_t>(row_count));
    for (int i = 0; i < row_count; ++i) order[static_cast<std::size_t>(i)] = i;
    SplitMix64 rng(seed);
    rng.shuffle(order);

    Partition p;
    p.seed = seed;
    p.ratio = ratio;
    p.train_rows.assign(order.begin(), order.begin() + train_size);
    p.holdout_rows.assign(order.begin() + train_size, order.end());
    std::sort(p.train_rows.begin(), p.train_rows.end());
    std::sort(p.holdout_rows.begin(), p.holdout_rows.end());
    return p;
}

}  // namespace stockpick::dataset
