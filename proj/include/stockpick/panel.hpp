#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace stockpick {

/// Missing-cell marker inside a FundamentalsPanel.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Stock x year x feature table of annual fundamentals. Cells are either a
// finite value or missing (NaN). Years are consecutive; tickers and feature
// names unique.
class FundamentalsPanel {
public:
    FundamentalsPanel() = default;
    FundamentalsPanel(std::vector<std::string> tickers, std::vector<int> years,
                      std::vector<std::string> features);

    std::size_t n_stocks() const { return tickers_.size(); }
    std::size_t n_years() const { return years_.size(); }
    std::size_t n_features() const { return features_.size(); }

    const std::vector<std::string>& tickers() const { return tickers_; }
    const std::vector<int>& years() const { return years_; }
    const std::vector<std::string>& features() const { return features_; }

    double at(std::size_t stock, std::size_t year, std::size_t feature) const {
        return values_[index(stock, year, feature)];
    }
    void set(std::size_t stock, std::size_t year, std::size_t feature, double v) {
        values_[index(stock, year, feature)] = v;
    }

    /// Index of a year value within years(); -1 if absent.
    int year_index(int year) const;
    int ticker_index(const std::string& ticker) const;
    int feature_index(const std::string& name) const;

    /// Fraction of non-missing cells for one stock across all years/features.
    double coverage(std::size_t stock) const;
    /// Number of years in which the stock has at least one non-missing cell.
    int year_span(std::size_t stock) const;

    /// Checks the structural invariants; throws Error "InvalidPanel" on breach.
    void validate() const;

private:
    std::size_t index(std::size_t s, std::size_t y, std::size_t f) const {
        return (s * years_.size() + y) * features_.size() + f;
    }

    std::vector<std::string> tickers_;
    std::vector<int> years_;
    std::vector<std::string> features_;
    std::vector<double> values_;
};

}  // namespace stockpick
