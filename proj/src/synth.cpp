#include "stockpick/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "stockpick/csv.hpp"
#include "stockpick/errors.hpp"
#include "stockpick/rng.hpp"

namespace stockpick::synth {

namespace {

void validate_spec(const SynthSpec& spec) {
    if (spec.n_stocks < 2 || spec.n_years < 2 || spec.n_features < 1) {
        throw Error::config("InvalidSpec", "universe dimensions too small");
    }
    if (spec.signal_strength < 0.0 || spec.noise_sigma < 0.0) {
        throw Error::config("InvalidSpec", "strength/noise must be non-negative");
    }
    if (spec.missing_rate < 0.0 || spec.missing_rate > 1.0) {
        throw Error::config("InvalidSpec", "missing rate out of [0,1]");
    }
    for (int f : spec.signal_features) {
        if (f < 0 || f >= spec.n_features) {
            throw Error::config("InvalidSpec", "signal feature index out of range");
        }
    }
}

std::uint64_t ticker_hash(const std::string& ticker) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : ticker) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string ticker_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "SYN%04d", i);
    return std::string(buf);
}

}  // namespace

Universe generate_universe(const SynthSpec& spec) {
    validate_spec(spec);
    std::vector<int> signal = spec.signal_features;
    if (signal.empty()) {
        for (int f = 0; f < std::min(4, spec.n_features); ++f) signal.push_back(f);
    }

    SplitMix64 rng(spec.seed);

    std::vector<std::string> tickers;
    for (int i = 0; i < spec.n_stocks; ++i) tickers.push_back(ticker_name(i));
    std::vector<int> years;
    for (int y = 0; y < spec.n_years; ++y) years.push_back(spec.first_year + y);
    std::vector<std::string> features;
    for (int f = 0; f < spec.n_features; ++f) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "F%02d", f);
        features.push_back(buf);
    }

    Universe u;
    u.panel = FundamentalsPanel(tickers, years, features);

    // Planted weights over the signal features, unit norm.
    u.weights.resize(static_cast<Eigen::Index>(signal.size()));
    for (Eigen::Index i = 0; i < u.weights.size(); ++i) u.weights(i) = rng.next_normal();
    double norm = u.weights.norm();
    if (norm == 0.0) u.weights.setConstant(1.0);
    u.weights /= u.weights.norm();

    // Smooth positive fundamentals: level starts at 1 and follows a persistent
    // multiplicative drift, so the base-year stage is benign and DCT low-pass
    // smoothing retains most of the variation.
    // Stationary AR(1) log-level: the cross-sectional dispersion stays
    // moderate in every year (a drift random walk would turn late years into
    // extreme lognormals whose z-scores collapse into a near-constant cluster).
    // The first year is drawn from the stationary distribution too: a constant
    // first cross-section would make every z-score (and hence the planted
    // score of the first label year) exactly zero.
    const double stationary_sd = 0.30 / std::sqrt(1.0 - 0.85 * 0.85);
    FundamentalsPanel clean = u.panel;
    for (int s = 0; s < spec.n_stocks; ++s) {
        for (int f = 0; f < spec.n_features; ++f) {
            double log_level = 0.0;
            for (int y = 0; y < spec.n_years; ++y) {
                if (y == 0) log_level = stationary_sd * rng.next_normal();
                else log_level = 0.85 * log_level + 0.30 * rng.next_normal();
                clean.set(static_cast<std::size_t>(s), static_cast<std::size_t>(y),
                          static_cast<std::size_t>(f), std::exp(log_level));
            }
        }
    }

    // Cross-sectional z-scores of the clean panel; the planted score lives in
    // this representation.
    auto zscore = [&](int year_idx, int feature) {
        Eigen::VectorXd column(spec.n_stocks);
        for (int s = 0; s < spec.n_stocks; ++s) {
            column(s) = clean.at(static_cast<std::size_t>(s),
                                 static_cast<std::size_t>(year_idx),
                                 static_cast<std::size_t>(feature));
        }
        double mean = column.mean();
        column.array() -= mean;
        double sd = std::sqrt(column.squaredNorm() / spec.n_stocks);
        if (sd > 0.0) column /= sd;
        return column;
    };

    // Planted outcomes for every label year whose feature year is in the panel.
    for (int y = 0; y < spec.n_years; ++y) {
        int label_year = spec.first_year + y + 1;
        Eigen::MatrixXd z(spec.n_stocks, static_cast<Eigen::Index>(signal.size()));
        for (std::size_t k = 0; k < signal.size(); ++k) {
            z.col(static_cast<Eigen::Index>(k)) = zscore(y, signal[k]);
        }
        Eigen::VectorXd scores = z * u.weights;
        for (int s = 0; s < spec.n_stocks; ++s) {
            PlantedOutcome outcome;
            outcome.score = scores(s);
            double ret = spec.signal_strength * outcome.score +
                         spec.noise_sigma * rng.next_normal();
            outcome.relative_return = std::max(ret, -0.9);
            outcome.label = outcome.relative_return > 0.0 ? 1 : -1;
            u.truth[{tickers[static_cast<std::size_t>(s)], label_year}] = outcome;
        }
    }

    // Announcement dates: fiscal-year y financials announced in year y+1,
    // month/day spread deterministically per ticker.
    for (int s = 0; s < spec.n_stocks; ++s) {
        std::uint64_t h = ticker_hash(tickers[static_cast<std::size_t>(s)]);
        int month = 2 + static_cast<int>(h % 7);         // Feb..Aug: window stays in-year
        int day = 1 + static_cast<int>((h >> 8) % 28);
        for (int y = 0; y < spec.n_years; ++y) {
            int fiscal = spec.first_year + y;
            u.announcements.add(tickers[static_cast<std::size_t>(s)], fiscal,
                                Date{fiscal + 1, month, day});
        }
    }

    // Prices: flat index, stock path realizing the planted relative return
    // over each announcement window.
    std::set<Date> index_dates;
    for (int s = 0; s < spec.n_stocks; ++s) {
        const std::string& ticker = tickers[static_cast<std::size_t>(s)];
        double price = 20.0 + 80.0 * rng.next_double();
        auto& series = u.prices.by_ticker[ticker];
        for (int y = 0; y < spec.n_years; ++y) {
            int fiscal = spec.first_year + y;
            Date start = u.announcements.at(ticker, fiscal);
            Date end = start.add_months(3);
            double ret = u.truth.at({ticker, fiscal + 1}).relative_return;
            series.push_back({start, price});
            price *= 1.0 + ret;
            series.push_back({end, price});
            index_dates.insert(start);
            index_dates.insert(end);
        }
    }
    for (const Date& d : index_dates) u.prices.index_series.push_back({d, 100.0});

    // Metadata: lognormal caps, all tickers active.
    for (int s = 0; s < spec.n_stocks; ++s) {
        ingest::StockMeta m;
        m.ticker = tickers[static_cast<std::size_t>(s)];
        m.market_cap = 1e8 * std::exp(1.5 * rng.next_normal());
        m.active = true;
        u.meta.push_back(m);
    }

    // Copy clean values into the panel, then inject missing cells.
    u.panel = clean;
    if (spec.missing_rate > 0.0) {
        for (std::size_t s = 0; s < u.panel.n_stocks(); ++s)
            for (std::size_t y = 0; y < u.panel.n_years(); ++y)
                for (std::size_t f = 0; f < u.panel.n_features(); ++f)
                    if (rng.next_double() < spec.missing_rate) u.panel.set(s, y, f, kMissing);
    }
    for (auto& m : u.meta) {
        int s = u.panel.ticker_index(m.ticker);
        m.coverage = u.panel.coverage(static_cast<std::size_t>(s));
        m.year_span = u.panel.year_span(static_cast<std::size_t>(s));
    }
    return u;
}

double bayes_accuracy(const Universe& universe) {
    if (universe.truth.empty()) throw Error::data("SpecMismatch", "universe has no planted truth");
    int agree = 0;
    for (const auto& [key, outcome] : universe.truth) {
        int optimal = outcome.score > 0.0 ? 1 : -1;
        if (optimal == outcome.label) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(universe.truth.size());
}

UniverseFiles to_csv(const Universe& universe) {
    UniverseFiles files;
    files.fundamentals = ingest::write_fundamentals_csv(universe.panel);

    std::ostringstream prices;
    prices << "ticker,date,adj_close\n";
    for (const auto& [ticker, series] : universe.prices.by_ticker) {
        for (const auto& p : series) {
            prices << ticker << ',' << p.date.to_string() << ',' << csv::format_double(p.close)
                   << '\n';
        }
    }
    files.prices = prices.str();

    std::ostringstream index;
    index << "date,level\n";
    for (const auto& p : universe.prices.index_series) {
        index << p.date.to_string() << ',' << csv::format_double(p.close) << '\n';
    }
    files.index = index.str();

    std::ostringstream meta;
    meta << "ticker,market_cap,active\n";
    for (const auto& m : universe.meta) {
        meta << m.ticker << ',' << csv::format_double(m.market_cap) << ','
             << (m.active ? 1 : 0) << '\n';
    }
    files.meta = meta.str();

    files.announcements = universe.announcements.to_csv();
    return files;
}

}  // namespace stockpick::synth
