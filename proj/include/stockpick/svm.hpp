#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "stockpick/dataset.hpp"

namespace stockpick::svm {

struct KernelParams {
    double sigma = 1.0;  // K(x,z) = exp(-||x-z||^2 / (2 sigma^2))
};

enum class Solver { SMO, LEAST_SQUARES };

struct SvmConfig {
    double box_constraint = 0.8;          // C
    double kkt_violation_fraction = 0.10;  // SMO stop: tolerated violator share
    double kkt_tolerance = 1e-3;
    int max_passes = 2000;                // full sweeps over the training set
    Solver solver = Solver::LEAST_SQUARES;
};

struct TrainedModel {
    Eigen::MatrixXd support_vectors;  // one row per retained training point
    Eigen::VectorXd alpha;            // dual coefficients, aligned to rows
    Eigen::VectorXd labels;           // y_i in {-1,+1}, aligned to rows
    std::vector<int> sv_indices;      // positions in the original training set
    double bias = 0.0;
    KernelParams kernel;
    double box_constraint = 0.8;
    Solver solver = Solver::LEAST_SQUARES;
    int iterations = 0;
    double final_kkt_violation = 0.0;  // SMO only
    bool converged = true;
};

double kernel_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const KernelParams& params);

/// Pairwise squared Euclidean distances between rows (clamped at 0).
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X);

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& sq_dist, const KernelParams& params);

/// K_ij = kernel_eval(row_i, row_j); symmetric, unit diagonal, PSD.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& params);

/// SMO dual solver with the relaxed stopping rule: terminate once the fraction
/// of support vectors violating KKT beyond kkt_tolerance drops to
/// kkt_violation_fraction or below.
TrainedModel train_smo(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const KernelParams& kernel, const SvmConfig& cfg);

/// Least-squares SVM: solves the saddle system
///   [0  y^T; y  Omega + I/gamma] [b; alpha] = [0; 1],
/// Omega_ij = y_i y_j K_ij, gamma = C. All points are support vectors.
TrainedModel train_lssvm(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const KernelParams& kernel, const SvmConfig& cfg);

/// Dispatches on cfg.solver.
TrainedModel train(const Eigen::MatrixXd& X, const std::vector<int>& y,
                   const KernelParams& kernel, const SvmConfig& cfg);

/// f(x) = sum_i alpha_i y_i K(x_i, x) + b.
double decision_value(const TrainedModel& model, const Eigen::VectorXd& x);
int predict_label(const TrainedModel& model, const Eigen::VectorXd& x);  // sign(0) -> -1
std::vector<int> predict_labels(const TrainedModel& model, const Eigen::MatrixXd& X);

/// W(alpha) = sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const TrainedModel& model);

/// Post-hoc check of the C-SVM KKT conditions over the model's support
/// vectors. Throws "WrongSolver" for least-squares models.
double kkt_violation_fraction(const TrainedModel& model, const Eigen::MatrixXd& X,
                              const std::vector<int>& y, const SvmConfig& cfg);

struct GridScore {
    double sigma = 0.0;
    double c = 0.0;
    double holdout_accuracy = 0.0;
};

struct GridSearchResult {
    KernelParams best_kernel;
    double best_c = 0.0;
    std::vector<GridScore> table;
};

/// Geometric grids: sigma in sigma0 * 2^{-4..4} (sigma0 = median pairwise
/// distance), C in 2^{-4..4}.
std::vector<double> default_sigma_grid(const Eigen::MatrixXd& X);
std::vector<double> default_c_grid();

/// Trains on the partition's train rows for every (sigma, C) pair and scores
/// holdout accuracy; ties broken by smaller C then smaller sigma.
GridSearchResult grid_search(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             const dataset::Partition& partition,
                             const std::vector<double>& sigma_grid,
                             const std::vector<double>& c_grid, const SvmConfig& cfg);

/// Model JSON round-trippable bit-exactly for the numeric fields.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& json_text);

}  // namespace stockpick::svm
