#include "stockpick/panel.hpp"

#include <algorithm>
#include <set>

#include "stockpick/errors.hpp"

namespace stockpick {

FundamentalsPanel::FundamentalsPanel(std::vector<std::string> tickers, std::vector<int> years,
                                     std::vector<std::string> features)
    : tickers_(std::move(tickers)), years_(std::move(years)), features_(std::move(features)) {
    values_.assign(tickers_.size() * years_.size() * features_.size(), kMissing);
    validate();
}

int FundamentalsPanel::year_index(int year) const {
    if (years_.empty() || year < years_.front() || year > years_.back()) return -1;
    return year - years_.front();
}

int FundamentalsPanel::ticker_index(const std::string& ticker) const {
    auto it = std::find(tickers_.begin(), tickers_.end(), ticker);
    return it == tickers_.end() ? -1 : static_cast<int>(it - tickers_.begin());
}

int FundamentalsPanel::feature_index(const std::string& name) const {
    auto it = std::find(features_.begin(), features_.end(), name);
    return it == features_.end() ? -1 : static_cast<int>(it - features_.begin());
}

double FundamentalsPanel::coverage(std::size_t stock) const {
    std::size_t cells = years_.size() * features_.size();
    if (cells == 0) return 0.0;
    std::size_t present = 0;
    for (std::size_t y = 0; y < years_.size(); ++y)
        for (std::size_t f = 0; f < features_.size(); ++f)
            if (!is_missing(at(stock, y, f))) ++present;
    return static_cast<double>(present) / static_cast<double>(cells);
}

int FundamentalsPanel::year_span(std::size_t stock) const {
    int span = 0;
    for (std::size_t y = 0; y < years_.size(); ++y) {
        for (std::size_t f = 0; f < features_.size(); ++f) {
            if (!is_missing(at(stock, y, f))) {
                ++span;
                break;
            }
        }
    }
    return span;
}

void FundamentalsPanel::validate() const {
    if (values_.size() != tickers_.size() * years_.size() * features_.size()) {
        throw Error::data("InvalidPanel", "value table does not match dimensions");
    }
    for (std::size_t i = 1; i < years_.size(); ++i) {
        if (years_[i] != years_[i - 1] + 1) {
            throw Error::data("InvalidPanel", "years must be strictly increasing and consecutive");
        }
    }
    std::set<std::string> seen(tickers_.begin(), tickers_.end());
    if (seen.size() != tickers_.size()) throw Error::data("InvalidPanel", "duplicate ticker");
    std::set<std::string> feat(features_.begin(), features_.end());
    if (feat.size() != features_.size()) throw Error::data("InvalidPanel", "duplicate feature");
}

}  // namespace stockpick
