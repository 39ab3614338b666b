#include "stockpick/ingest.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "stockpick/csv.hpp"
#include "stockpick/errors.hpp"

namespace stockpick::ingest {

FundamentalsPanel load_fundamentals(const std::string& path) {
    auto table = csv::read_file(path, {"ticker", "year", "feature", "value"});

    std::vector<std::string> tickers;
    std::vector<std::string> features;
    std::map<std::string, int> ticker_ids;
    std::map<std::string, int> feature_ids;
    int min_year = std::numeric_limits<int>::max();
    int max_year = std::numeric_limits<int>::min();

    struct Cell {
        int ticker, year, feature;
        double value;
    };
    std::vector<Cell> cells;
    cells.reserve(table.rows.size());
    std::set<std::tuple<int, int, int>> seen;

    for (const auto& row : table.rows) {
        const std::string& ticker = row[0];
        if (ticker.empty()) throw Error::data("MalformedRow", path + ": empty ticker");
        int year = static_cast<int>(csv::parse_int(row[1], path));
        const std::string& feature = row[2];
        if (feature.empty()) throw Error::data("MalformedRow", path + ": empty feature name");
        double value = row[3].empty() ? kMissing : csv::parse_double(row[3], path);

        auto [tit, tnew] = ticker_ids.emplace(ticker, static_cast<int>(tickers.size()));
        if (tnew) tickers.push_back(ticker);
        auto [fit, fnew] = feature_ids.emplace(feature, static_cast<int>(features.size()));
        if (fnew) features.push_back(feature);

        if (!seen.insert({tit->second, year, fit->second}).second) {
            throw Error::data("DuplicateCell", path + ": duplicate (" + ticker + "," + row[1] +
                                                   "," + feature + ")");
        }
        min_year = std::min(min_year, year);
        max_year = std::max(max_year, year);
        cells.push_back({tit->second, year, fit->second, value});
    }

    std::vector<int> years;
    for (int y = min_year; y <= max_year; ++y) years.push_back(y);

    FundamentalsPanel panel(std::move(tickers), std::move(years), std::move(features));
    for (const auto& c : cells) {
        panel.set(static_cast<std::size_t>(c.ticker),
                  static_cast<std::size_t>(c.year - min_year),
                  static_cast<std::size_t>(c.feature), c.value);
    }
    return panel;
}

PriceTable load_prices(const std::string& prices_path, const std::string& index_path) {
    PriceTable out;

    auto prices = csv::read_file(prices_path, {"ticker", "date", "adj_close"});
    for (const auto& row : prices.rows) {
        PricePoint p;
        p.date = Date::parse(row[1]);
        p.close = csv::parse_double(row[2], prices_path);
        if (p.close <= 0.0) {
            throw Error::data("NonPositivePrice",
                              prices_path + ": " + row[0] + " @ " + row[1]);
        }
        out.by_ticker[row[0]].push_back(p);
    }
    for (auto& [ticker, series] : out.by_ticker) {
        std::stable_sort(series.begin(), series.end(),
                         [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < series.size(); ++i) {
            if (series[i].date == series[i - 1].date) {
                throw Error::data("UnsortableDates", prices_path + ": duplicate date " +
                                                         series[i].date.to_string() + " for " +
                                                         ticker);
            }
        }
    }

    auto index = csv::read_file(index_path, {"date", "level"});
    for (const auto& row : index.rows) {
        PricePoint p;
        p.date = Date::parse(row[0]);
        p.close = csv::parse_double(row[1], index_path);
        if (p.close <= 0.0) throw Error::data("NonPositivePrice", index_path + " @ " + row[0]);
        out.index_series.push_back(p);
    }
    std::stable_sort(out.index_series.begin(), out.index_series.end(),
                     [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < out.index_series.size(); ++i) {
        if (out.index_series[i].date == out.index_series[i - 1].date) {
            throw Error::data("UnsortableDates", index_path + ": duplicate date " +
                                                     out.index_series[i].date.to_string());
        }
    }
    return out;
}

std::vector<StockMeta> load_meta(const std::string& path, const FundamentalsPanel& panel) {
    auto table = csv::read_file(path, {"ticker", "market_cap", "active"});
    std::map<std::string, StockMeta> by_ticker;
    for (const auto& row : table.rows) {
        StockMeta m;
        m.ticker = row[0];
        m.market_cap = csv::parse_double(row[1], path);
        long long active = csv::parse_int(row[2], path);
        if (m.market_cap < 0.0 || (active != 0 && active != 1)) {
            throw Error::data("MalformedRow", path + ": bad meta row for " + row[0]);
        }
        m.active = active == 1;
        if (!by_ticker.emplace(m.ticker, m).second) {
            throw Error::data("DuplicateCell", path + ": duplicate ticker " + m.ticker);
        }
    }

    std::vector<StockMeta> out;
    out.reserve(panel.n_stocks());
    for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
        auto it = by_ticker.find(panel.tickers()[s]);
        if (it == by_ticker.end()) {
            throw Error::data("MetaMissing", "no metadata for ticker " + panel.tickers()[s]);
        }
        StockMeta m = it->second;
        m.coverage = panel.coverage(s);
        m.year_span = panel.year_span(s);
        out.push_back(m);
    }
    return out;
}

namespace {

FundamentalsPanel subset_stocks(const FundamentalsPanel& panel, const std::vector<int>& keep) {
    std::vector<std::string> tickers;
    tickers.reserve(keep.size());
    for (int s : keep) tickers.push_back(panel.tickers()[s]);
    FundamentalsPanel out(std::move(tickers), panel.years(),
                          panel.features());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t y = 0; y < panel.n_years(); ++y)
            for (std::size_t f = 0; f < panel.n_features(); ++f)
                out.set(i, y, f, panel.at(static_cast<std::size_t>(keep[i]), y, f));
    return out;
}

}  // namespace

FundamentalsPanel filter_universe(const FundamentalsPanel& panel,
                                  const std::vector<StockMeta>& meta,
                                  const UniverseRules& rules) {
    std::map<std::string, const StockMeta*> by_ticker;
    for (const auto& m : meta) by_ticker[m.ticker] = &m;

    std::vector<int> survivors;
    for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
        auto it = by_ticker.find(panel.tickers()[s]);
        if (it == by_ticker.end()) {
            throw Error::data("MetaMissing", "no metadata for ticker " + panel.tickers()[s]);
        }
        const StockMeta& m = *it->second;
        if (m.coverage < rules.min_coverage) continue;
        if (m.year_span < rules.min_years) continue;
        if (rules.require_active && !m.active) continue;
        survivors.push_back(static_cast<int>(s));
    }

    if (rules.drop_smallest_cap > 0 && !survivors.empty()) {
        std::vector<int> by_cap = survivors;
        // Smallest caps first; ties broken by ticker so the drop is deterministic.
        std::sort(by_cap.begin(), by_cap.end(), [&](int a, int b) {
            double ca = by_ticker[panel.tickers()[a]]->market_cap;
            double cb = by_ticker[panel.tickers()[b]]->market_cap;
            if (ca != cb) return ca < cb;
            return panel.tickers()[a] < panel.tickers()[b];
        });
        std::set<int> dropped(by_cap.begin(),
                              by_cap.begin() + std::min<std::size_t>(
                                                   static_cast<std::size_t>(rules.drop_smallest_cap),
                                                   by_cap.size()));
        std::vector<int> kept;
        for (int s : survivors)
            if (!dropped.count(s)) kept.push_back(s);
        survivors = std::move(kept);
    }

    if (survivors.empty()) throw Error::data("EmptyUniverse", "all tickers filtered out");
    return subset_stocks(panel, survivors);
}

std::string write_fundamentals_csv(const FundamentalsPanel& panel) {
    std::ostringstream out;
    out << "ticker,year,feature,value\n";
    for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
        for (std::size_t y = 0; y < panel.n_years(); ++y) {
            for (std::size_t f = 0; f < panel.n_features(); ++f) {
                double v = panel.at(s, y, f);
                out << panel.tickers()[s] << ',' << panel.years()[y] << ','
                    << panel.features()[f] << ',';
                if (!is_missing(v)) out << csv::format_double(v);
                out << '\n';
            }
        }
    }
    return out.str();
}

}  // namespace stockpick::ingest
