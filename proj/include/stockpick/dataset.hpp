#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stockpick/date.hpp"
#include "stockpick/ingest.hpp"
#include "stockpick/panel.hpp"

namespace stockpick::dataset {

struct WindowSpec {
    int lookback = 5;        // L
    int train_years = 5;     // M
    int horizon_months = 3;  // label window after the announcement date
    int prediction_year = 0; // t
};

struct DesignMatrix {
    Eigen::MatrixXd values;                            // rows x (k * L)
    std::vector<std::pair<std::string, int>> row_index;  // (ticker, label year)
};

struct LabelVector {
    std::vector<int> labels;             // {-1, +1}, aligned to DesignMatrix rows
    std::vector<double> relative_returns;  // realized return vs. market per row
};

struct Partition {
    std::vector<int> train_rows;    // sorted, disjoint from holdout_rows
    std::vector<int> holdout_rows;  // sorted; union covers [0, row_count)
    std::uint64_t seed = 0;
    double ratio = 0.9;
};

/// Announcement date of each (ticker, fiscal year)'s financials. The label
/// window for label year y starts at the announcement of year y-1 financials.
class AnnouncementBook {
public:
    void add(const std::string& ticker, int fiscal_year, Date date);
    const Date& at(const std::string& ticker, int fiscal_year) const;  // throws if absent
    bool contains(const std::string& ticker, int fiscal_year) const;

    static AnnouncementBook load(const std::string& path);  // CSV ticker,year,announcement_date
    std::string to_csv() const;

private:
    std::map<std::pair<std::string, int>, Date> dates_;
};

struct LabelOutcome {
    int label = 0;               // +1 bullish, -1 bearish
    double relative_return = 0;  // stock return minus index return
};

/// Returns over [announcement, announcement + horizon months], endpoints
/// resolved to the nearest trading date on or after. Ties (relative return
/// exactly 0) are bearish.
LabelOutcome compute_label(const ingest::PriceTable& prices, const std::string& ticker,
                           Date announcement, int horizon_months);

/// [x(t-1); x(t-2); ...; x(t-L)] for one stock; length k*L.
Eigen::VectorXd build_window(const FundamentalsPanel& panel, std::size_t stock, int year,
                             int lookback);

/// Stacked training matrix: stock-major blocks, label years t-1 down to t-M.
std::pair<DesignMatrix, LabelVector> build_training_set(const FundamentalsPanel& panel,
                                                        const ingest::PriceTable& prices,
                                                        const AnnouncementBook& announcements,
                                                        const WindowSpec& spec);

/// One row per stock for the prediction year t.
DesignMatrix build_prediction_set(const FundamentalsPanel& panel, const WindowSpec& spec);

/// Uniform random train/holdout split; |train| = round-half-up(ratio * rows).
Partition random_partition(int row_count, double ratio, std::uint64_t seed);

}  // namespace stockpick::dataset
