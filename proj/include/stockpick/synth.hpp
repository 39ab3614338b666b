#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stockpick/dataset.hpp"
#include "stockpick/ingest.hpp"
#include "stockpick/panel.hpp"

namespace stockpick::synth {

struct SynthSpec {
    int n_stocks = 100;
    int n_years = 12;
    int n_features = 12;
    std::vector<int> signal_features;  // feature indices carrying the signal
    double signal_strength = 0.05;
    double noise_sigma = 0.0;
    double missing_rate = 0.0;
    std::uint64_t seed = 42;
    int first_year = 2002;
};

struct PlantedOutcome {
    double score = 0.0;            // planted signal before noise
    double relative_return = 0.0;  // score * strength + noise, clamped > -1
    int label = 0;                 // sign(relative_return), ties bearish
};

struct Universe {
    FundamentalsPanel panel;  // with missing cells injected
    ingest::PriceTable prices;
    std::vector<ingest::StockMeta> meta;
    dataset::AnnouncementBook announcements;

    // Ground truth, keyed by (ticker, label year).
    std::map<std::pair<std::string, int>, PlantedOutcome> truth;
    Eigen::VectorXd weights;  // over signal features, unit norm
};

/// Deterministic planted-signal universe. With noise_sigma = 0 and
/// missing_rate = 0, compute_label over the generated prices reproduces the
/// planted labels exactly.
Universe generate_universe(const SynthSpec& spec);

/// Accuracy of the optimal classifier (sign of the planted score) against the
/// generated labels.
double bayes_accuracy(const Universe& universe);

/// CSV emission in the exact formats the ingest module consumes.
struct UniverseFiles {
    std::string fundamentals;
    std::string prices;
    std::string index;
    std::string meta;
    std::string announcements;
};
UniverseFiles to_csv(const Universe& universe);

}  // namespace stockpick::synth
