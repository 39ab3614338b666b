#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "stockpick/panel.hpp"

namespace stockpick::preprocess {

struct PreprocessConfig {
    double missing_threshold = 0.05;  // drop features missing more than this
    int dct_width = 7;                // rectangular filter width h
    double pca_drop_fraction = 0.15;  // smallest singular values zeroed, by count
    bool apply_base_year = true;
};

/// DCT coefficients F[k] of a length-N signal (orthonormal type-II pair).
using SpectralVector = std::vector<double>;

struct PreprocessResult {
    FundamentalsPanel panel;
    std::vector<std::string> dropped_features;
    std::vector<std::string> stage_log;
};

/// Removes features whose missing fraction strictly exceeds `threshold`.
FundamentalsPanel drop_sparse_features(const FundamentalsPanel& panel, double threshold,
                                       std::vector<std::string>* dropped = nullptr);

/// Replaces each missing cell by the cross-sectional (within-year) mean of the
/// feature. Throws "AllMissingSlice" if a feature-year has no present value.
FundamentalsPanel impute_mean(const FundamentalsPanel& panel);

/// Element-wise division by the first element. Throws "BaseZero" if it is 0.
std::vector<double> normalize_base_year(const std::vector<double>& series);

/// Per (feature, year): subtract cross-sectional mean, divide by population
/// standard deviation. Constant slices become all zeros.
FundamentalsPanel zscore_per_year(const FundamentalsPanel& panel);

SpectralVector dct_forward(const std::vector<double>& signal);
std::vector<double> dct_inverse(const SpectralVector& coeffs);

/// Keeps the first h coefficients, zeroes the rest. h >= N is the identity.
SpectralVector rect_filter(const SpectralVector& coeffs, int width);

/// dct_inverse(rect_filter(dct_forward(f), h)).
std::vector<double> smooth_series(const std::vector<double>& signal, int width);

/// Zeroes the floor(drop_fraction * min(m,p)) smallest singular values of X
/// and returns the reconstruction.
Eigen::MatrixXd pca_denoise(const Eigen::MatrixXd& X, double drop_fraction);

/// Full pipeline: sparse-feature drop -> base-year -> imputation -> z-score ->
/// per-series DCT smoothing -> per-year PCA denoise. Optional per-stage panel
/// capture for --dump-stage.
PreprocessResult run_preprocess(const FundamentalsPanel& panel, const PreprocessConfig& cfg,
                                std::vector<std::pair<std::string, FundamentalsPanel>>* stages =
                                    nullptr);

}  // namespace stockpick::preprocess
