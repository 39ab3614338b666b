#include "stockpick/preprocess.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stockpick/errors.hpp"

namespace stockpick::preprocess {

FundamentalsPanel drop_sparse_features(const FundamentalsPanel& panel, double threshold,
                                       std::vector<std::string>* dropped) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw Error::config("ConfigInvalid", "missing threshold out of [0,1]");
    }
    const std::size_t cells = panel.n_stocks() * panel.n_years();
    std::vector<int> keep;
    for (std::size_t f = 0; f < panel.n_features(); ++f) {
        std::size_t missing = 0;
        for (std::size_t s = 0; s < panel.n_stocks(); ++s)
            for (std::size_t y = 0; y < panel.n_years(); ++y)
                if (is_missing(panel.at(s, y, f))) ++missing;
        double fraction = cells ? static_cast<double>(missing) / static_cast<double>(cells) : 0.0;
        if (fraction > threshold) {
            if (dropped) dropped->push_back(panel.features()[f]);
        } else {
            keep.push_back(static_cast<int>(f));
        }
    }
    if (keep.empty()) throw Error::data("AllFeaturesDropped", "no feature survives the threshold");

    std::vector<std::string> features;
    for (int f : keep) features.push_back(panel.features()[f]);
    FundamentalsPanel out(panel.tickers(), panel.years(), std::move(features));
    for (std::size_t s = 0; s < panel.n_stocks(); ++s)
        for (std::size_t y = 0; y < panel.n_years(); ++y)
            for (std::size_t i = 0; i < keep.size(); ++i)
                out.set(s, y, i, panel.at(s, y, static_cast<std::size_t>(keep[i])));
    return out;
}

FundamentalsPanel impute_mean(const FundamentalsPanel& panel) {
    FundamentalsPanel out = panel;
    for (std::size_t f = 0; f < panel.n_features(); ++f) {
        for (std::size_t y = 0; y < panel.n_years(); ++y) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
                double v = panel.at(s, y, f);
                if (!is_missing(v)) {
                    sum += v;
                    ++count;
                }
            }
            if (count == 0) {
                throw Error::data("AllMissingSlice",
                                  "feature '" + panel.features()[f] + "' year " +
                                      std::to_string(panel.years()[y]) + " has no data");
            }
            if (count == panel.n_stocks()) continue;
            double mean = sum / static_cast<double>(count);
            for (std::size_t s = 0; s < panel.n_stocks(); ++s)
                if (is_missing(panel.at(s, y, f))) out.set(s, y, f, mean);
        }
    }
    return out;
}

std::vector<double> normalize_base_year(const std::vector<double>& series) {
    if (series.empty()) throw Error::data("EmptySignal", "empty series");
    if (series.front() == 0.0) throw Error::data("BaseZero", "first element is zero");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] / series.front();
    return out;
}

FundamentalsPanel zscore_per_year(const FundamentalsPanel& panel) {
    FundamentalsPanel out = panel;
    const double n = static_cast<double>(panel.n_stocks());
    for (std::size_t f = 0; f < panel.n_features(); ++f) {
        for (std::size_t y = 0; y < panel.n_years(); ++y) {
            double mean = 0.0;
            for (std::size_t s = 0; s < panel.n_stocks(); ++s) mean += panel.at(s, y, f);
            mean /= n;
            double var = 0.0;
            for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
                double d = panel.at(s, y, f) - mean;
                var += d * d;
            }
            var /= n;  // population variance
            double sd = std::sqrt(var);
            for (std::size_t s = 0; s < panel.n_stocks(); ++s) {
                double z = sd == 0.0 ? 0.0 : (panel.at(s, y, f) - mean) / sd;
                out.set(s, y, f, z);
            }
        }
    }
    return out;
}

namespace {

// Orthonormal cosine basis: B(k,n) = s_k cos(pi (2n+1) k / (2N)),
// s_0 = sqrt(1/N), s_k = sqrt(2/N). Forward is B f, inverse is B^T F.
Eigen::MatrixXd cosine_basis(std::size_t n) {
    Eigen::MatrixXd basis(n, n);
    const double N = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        double scale = k == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
        for (std::size_t j = 0; j < n; ++j) {
            basis(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) *
                                 static_cast<double>(k) / (2.0 * N));
        }
    }
    return basis;
}

}  // namespace

SpectralVector dct_forward(const std::vector<double>& signal) {
    if (signal.empty()) throw Error::data("EmptySignal", "dct_forward on empty signal");
    Eigen::Map<const Eigen::VectorXd> f(signal.data(), static_cast<Eigen::Index>(signal.size()));
    Eigen::VectorXd coeffs = cosine_basis(signal.size()) * f;
    return SpectralVector(coeffs.data(), coeffs.data() + coeffs.size());
}

std::vector<double> dct_inverse(const SpectralVector& coeffs) {
    if (coeffs.empty()) throw Error::data("EmptySignal", "dct_inverse on empty spectrum");
    Eigen::Map<const Eigen::VectorXd> F(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    Eigen::VectorXd f = cosine_basis(coeffs.size()).transpose() * F;
    return std::vector<double>(f.data(), f.data() + f.size());
}

SpectralVector rect_filter(const SpectralVector& coeffs, int width) {
    if (width < 1) throw Error::config("ConfigInvalid", "filter width must be >= 1");
    SpectralVector out = coeffs;
    for (std::size_t k = static_cast<std::size_t>(width); k < out.size(); ++k) out[k] = 0.0;
    return out;
}

std::vector<double> smooth_series(const std::vector<double>& signal, int width) {
    return dct_inverse(rect_filter(dct_forward(signal), width));
}

Eigen::MatrixXd pca_denoise(const Eigen::MatrixXd& X, double drop_fraction) {
    if (drop_fraction < 0.0 || drop_fraction >= 1.0) {
        throw Error::config("ConfigInvalid", "drop fraction out of [0,1)");
    }
    if (!X.allFinite()) throw Error::data("NonFiniteInput", "matrix has non-finite entries");
    const Eigen::Index rank = std::min(X.rows(), X.cols());
    const Eigen::Index drop =
        static_cast<Eigen::Index>(std::floor(drop_fraction * static_cast<double>(rank)));
    if (drop == 0) return X;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd sv = svd.singularValues();  // descending
    for (Eigen::Index i = rank - drop; i < rank; ++i) sv(i) = 0.0;
    return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

PreprocessResult run_preprocess(const FundamentalsPanel& panel, const PreprocessConfig& cfg,
                                std::vector<std::pair<std::string, FundamentalsPanel>>* stages) {
    PreprocessResult result;
    auto log_stage = [&](const std::string& name, const FundamentalsPanel& p) {
        result.stage_log.push_back(name);
        if (stages) stages->emplace_back(name, p);
    };

    FundamentalsPanel current = drop_sparse_features(panel, cfg.missing_threshold,
                                                     &result.dropped_features);
    {
        std::ostringstream msg;
        msg << "drop_sparse_features: " << result.dropped_features.size() << " dropped, "
            << current.n_features() << " retained";
        log_stage(msg.str(), current);
    }

    if (cfg.apply_base_year) {
        // Series whose base value is zero or missing are remarked wholly
        // missing and recovered by the imputation stage.
        std::size_t remarked = 0;
        for (std::size_t s = 0; s < current.n_stocks(); ++s) {
            for (std::size_t f = 0; f < current.n_features(); ++f) {
                double base = current.at(s, 0, f);
                if (is_missing(base) || base == 0.0) {
                    for (std::size_t y = 0; y < current.n_years(); ++y)
                        current.set(s, y, f, kMissing);
                    ++remarked;
                    continue;
                }
                for (std::size_t y = 0; y < current.n_years(); ++y) {
                    double v = current.at(s, y, f);
                    if (!is_missing(v)) current.set(s, y, f, v / base);
                }
            }
        }
        std::ostringstream msg;
        msg << "normalize_base_year: " << remarked << " series remarked missing";
        log_stage(msg.str(), current);
    }

    current = impute_mean(current);
    log_stage("impute_mean", current);

    current = zscore_per_year(current);
    log_stage("zscore_per_year", current);

    {
        std::vector<double> series(current.n_years());
        for (std::size_t s = 0; s < current.n_stocks(); ++s) {
            for (std::size_t f = 0; f < current.n_features(); ++f) {
                for (std::size_t y = 0; y < current.n_years(); ++y) series[y] = current.at(s, y, f);
                auto smoothed = smooth_series(series, cfg.dct_width);
                for (std::size_t y = 0; y < current.n_years(); ++y)
                    current.set(s, y, f, smoothed[y]);
            }
        }
        std::ostringstream msg;
        msg << "smooth_series: h=" << cfg.dct_width;
        log_stage(msg.str(), current);
    }

    {
        Eigen::MatrixXd year_matrix(current.n_stocks(), current.n_features());
        for (std::size_t y = 0; y < current.n_years(); ++y) {
            for (std::size_t s = 0; s < current.n_stocks(); ++s)
                for (std::size_t f = 0; f < current.n_features(); ++f)
                    year_matrix(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(f)) =
                        current.at(s, y, f);
            Eigen::MatrixXd denoised = pca_denoise(year_matrix, cfg.pca_drop_fraction);
            for (std::size_t s = 0; s < current.n_stocks(); ++s)
                for (std::size_t f = 0; f < current.n_features(); ++f)
                    current.set(s, y, f,
                                denoised(static_cast<Eigen::Index>(s),
                                         static_cast<Eigen::Index>(f)));
        }
        std::ostringstream msg;
        msg << "pca_denoise: drop_fraction=" << cfg.pca_drop_fraction;
        log_stage(msg.str(), current);
    }

    result.panel = std::move(current);
    return result;
}

}  // namespace stockpick::preprocess
