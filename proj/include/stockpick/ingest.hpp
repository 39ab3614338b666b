#pragma once

#include <map>
#include <string>
#include <vector>

#include "stockpick/date.hpp"
#include "stockpick/panel.hpp"

namespace stockpick::ingest {

struct StockMeta {
    std::string ticker;
    double market_cap = 0.0;  // >= 0
    double coverage = 0.0;    // fraction of non-missing cells, [0,1]
    int year_span = 0;        // years with any data
    bool active = true;       // currently traded
};

struct PricePoint {
    Date date;
    double close = 0.0;  // adjusted close, > 0
};

struct PriceTable {
    std::map<std::string, std::vector<PricePoint>> by_ticker;  // per-ticker sorted by date
    std::vector<PricePoint> index_series;                      // sorted by date, level > 0
};

struct UniverseRules {
    double min_coverage = 0.5;
    int min_years = 10;
    bool require_active = true;
    int drop_smallest_cap = 152;
};

/// Long-format CSV `ticker,year,feature,value`; empty value field = missing.
FundamentalsPanel load_fundamentals(const std::string& path);

/// `ticker,date,adj_close` plus index CSV `date,level`; sorts per ticker.
PriceTable load_prices(const std::string& prices_path, const std::string& index_path);

/// meta CSV `ticker,market_cap,active`; coverage and year_span are filled in
/// from the panel.
std::vector<StockMeta> load_meta(const std::string& path, const FundamentalsPanel& panel);

/// Coverage/min-years/active screens, then removal of the `drop_smallest_cap`
/// lowest-market-cap survivors (cap ties broken by ticker order). Output
/// ticker order follows the input panel.
FundamentalsPanel filter_universe(const FundamentalsPanel& panel,
                                  const std::vector<StockMeta>& meta,
                                  const UniverseRules& rules);

/// Canonical long-format CSV emission; load(write(panel)) round-trips
/// bit-exactly.
std::string write_fundamentals_csv(const FundamentalsPanel& panel);

}  // namespace stockpick::ingest
