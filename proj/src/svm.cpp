#include "stockpick/svm.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "stockpick/csv.hpp"
#include "stockpick/errors.hpp"
#include "stockpick/rng.hpp"

namespace stockpick::svm {

namespace {

constexpr double kSvThreshold = 1e-8;   // alpha above this counts as a support vector
constexpr double kStepEps = 1e-14;      // minimum relative alpha step in takeStep

void check_labels(const Eigen::MatrixXd& X, const std::vector<int>& y) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw Error::data("DimensionMismatch", "label count does not match row count");
    }
    if (X.rows() < 2) throw Error::data("SingleClassInput", "need at least 2 training rows");
    bool pos = false, neg = false;
    for (int label : y) {
        if (label == 1) pos = true;
        else if (label == -1) neg = true;
        else throw Error::data("MalformedRow", "labels must be -1 or +1");
    }
    if (!pos || !neg) throw Error::data("SingleClassInput", "both classes must be present");
}

void check_kernel(const KernelParams& params) {
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
        throw Error::config("ConfigInvalid", "kernel sigma must be positive and finite");
    }
}

struct ViolationStats {
    int zero_violations = 0;  // alpha ~ 0 points breaking y f >= 1 - tol
    int sv_violations = 0;
    int sv_count = 0;
    double sv_fraction() const {
        return sv_count == 0 ? 0.0 : static_cast<double>(sv_violations) / sv_count;
    }
};

// When at least one alpha is free the threshold is pinned by the margin
// equations and the solver's running value is the consistent choice. At a
// corner of the box (every alpha at a bound) KKT only constrains b to an
// interval: b >= y_i - raw_i for (alpha=0, y=+1) and (alpha=C, y=-1) points,
// b <= y_i - raw_i for the other two bound cases. Certify with the midpoint.
double certificate_bias(const Eigen::VectorXd& alpha, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& raw, double C, double running_bias) {
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha(i) > kSvThreshold && alpha(i) < C - kSvThreshold) return running_bias;
    }
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        double c = y(i) - raw(i);
        bool at_lower = alpha(i) <= kSvThreshold;
        if ((at_lower && y(i) > 0) || (!at_lower && y(i) < 0)) lo = std::max(lo, c);
        else hi = std::min(hi, c);
    }
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return lo;
    if (std::isfinite(hi)) return hi;
    return running_bias;
}

ViolationStats violation_stats(const Eigen::VectorXd& alpha, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& K, double b, double C, double tol) {
    ViolationStats stats;
    Eigen::VectorXd f = K * alpha.cwiseProduct(y);
    f.array() += b;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        double margin = y(i) * f(i);
        if (alpha(i) <= kSvThreshold) {
            if (margin < 1.0 - tol) ++stats.zero_violations;
        } else {
            ++stats.sv_count;
            bool at_upper = alpha(i) >= C - kSvThreshold;
            bool violated = at_upper ? (margin > 1.0 + tol) : (std::abs(margin - 1.0) > tol);
            if (violated) ++stats.sv_violations;
        }
    }
    return stats;
}

struct SmoResult {
    Eigen::VectorXd alpha;
    double bias = 0.0;
    int passes = 0;
    double final_violation = 0.0;
    bool converged = false;
};

class SmoSolver {
public:
    SmoSolver(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const SvmConfig& cfg)
        : K_(K), y_(y), cfg_(cfg), n_(K.rows()), rng_(0x5EEDC0DEull) {
        alpha_ = Eigen::VectorXd::Zero(n_);
        errors_ = -y_;  // f = 0 initially
        bias_ = 0.0;
    }

    SmoResult solve() {
        bool examine_all = true;
        int passes = 0;
        SmoResult result;
        while (passes < cfg_.max_passes) {
            int changed = 0;
            for (Eigen::Index i = 0; i < n_; ++i) {
                if (examine_all || is_free(i)) changed += examine(i);
            }
            ++passes;

            double b_cert = stats_bias();
            ViolationStats stats =
                violation_stats(alpha_, y_, K_, b_cert, cfg_.box_constraint, cfg_.kkt_tolerance);
            bool any_sv = stats.sv_count > 0;
            if (any_sv && stats.zero_violations == 0 &&
                stats.sv_fraction() <= cfg_.kkt_violation_fraction) {
                result.converged = true;
                result.final_violation = stats.sv_fraction();
                bias_ = b_cert;
                break;
            }
            if (examine_all && changed == 0) {
                // No pair step can improve the dual at this tolerance.
                result.converged = stats.zero_violations == 0 &&
                                   stats.sv_fraction() <= cfg_.kkt_violation_fraction;
                result.final_violation = stats.sv_fraction();
                bias_ = b_cert;
                break;
            }
            if (examine_all) {
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        if (passes >= cfg_.max_passes) {
            bias_ = stats_bias();
            ViolationStats stats = violation_stats(alpha_, y_, K_, bias_,
                                                   cfg_.box_constraint, cfg_.kkt_tolerance);
            result.final_violation = stats.sv_fraction();
            result.converged = false;
        }
        result.alpha = alpha_;
        result.bias = bias_;
        result.passes = passes;
        return result;
    }

private:
    bool is_free(Eigen::Index i) const {
        return alpha_(i) > kSvThreshold && alpha_(i) < cfg_.box_constraint - kSvThreshold;
    }

    double stats_bias() const {
        Eigen::VectorXd raw = K_ * alpha_.cwiseProduct(y_);
        return certificate_bias(alpha_, y_, raw, cfg_.box_constraint, bias_);
    }

    int examine(Eigen::Index i2) {
        double y2 = y_(i2);
        double alph2 = alpha_(i2);
        double e2 = errors_(i2);
        double r2 = e2 * y2;
        const double tol = cfg_.kkt_tolerance;
        const double C = cfg_.box_constraint;
        bool violated = (r2 < -tol && alph2 < C - kSvThreshold) ||
                        (r2 > tol && alph2 > kSvThreshold);
        if (!violated) return 0;

        // Heuristic 1: largest |E1 - E2| among free points.
        Eigen::Index best = -1;
        double best_gap = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (i == i2 || !is_free(i)) continue;
            double gap = std::abs(errors_(i) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best >= 0 && take_step(best, i2)) return 1;

        // Heuristic 2: all free points from a random start.
        Eigen::Index start = static_cast<Eigen::Index>(rng_.next_below(static_cast<std::uint64_t>(n_)));
        for (Eigen::Index k = 0; k < n_; ++k) {
            Eigen::Index i1 = (start + k) % n_;
            if (i1 == i2 || !is_free(i1)) continue;
            if (take_step(i1, i2)) return 1;
        }
        // Heuristic 3: the whole set from a random start.
        start = static_cast<Eigen::Index>(rng_.next_below(static_cast<std::uint64_t>(n_)));
        for (Eigen::Index k = 0; k < n_; ++k) {
            Eigen::Index i1 = (start + k) % n_;
            if (i1 == i2) continue;
            if (take_step(i1, i2)) return 1;
        }
        return 0;
    }

    bool take_step(Eigen::Index i1, Eigen::Index i2) {
        if (i1 == i2) return false;
        const double C = cfg_.box_constraint;
        double alph1 = alpha_(i1), alph2 = alpha_(i2);
        double y1 = y_(i1), y2 = y_(i2);
        double e1 = errors_(i1), e2 = errors_(i2);
        double s = y1 * y2;

        double lo, hi;
        if (s < 0) {
            lo = std::max(0.0, alph2 - alph1);
            hi = std::min(C, C + alph2 - alph1);
        } else {
            lo = std::max(0.0, alph1 + alph2 - C);
            hi = std::min(C, alph1 + alph2);
        }
        if (lo >= hi) return false;

        double k11 = K_(i1, i1), k12 = K_(i1, i2), k22 = K_(i2, i2);
        double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = alph2 + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // Flat or concave direction: the dual gain along the constraint
            // line is g(d) = y2 (E1-E2) d - eta d^2 / 2, maximized at an end.
            auto gain = [&](double a2_end) {
                double d = a2_end - alph2;
                return y2 * (e1 - e2) * d - 0.5 * eta * d * d;
            };
            double gain_lo = gain(lo), gain_hi = gain(hi);
            if (gain_lo > gain_hi + 1e-12) a2 = lo;
            else if (gain_hi > gain_lo + 1e-12) a2 = hi;
            else return false;
        }
        if (std::abs(a2 - alph2) < kStepEps * (a2 + alph2 + kStepEps)) return false;

        double a1 = alph1 + s * (alph2 - a2);
        if (a1 < 0.0) a1 = 0.0;
        else if (a1 > C) a1 = C;

        double d1 = a1 - alph1;
        double d2 = a2 - alph2;

        // Threshold update: place a free updated point exactly on its margin.
        double e1_shift = e1 + y1 * d1 * k11 + y2 * d2 * k12;  // error at i1 before bias change
        double e2_shift = e2 + y1 * d1 * k12 + y2 * d2 * k22;
        double new_bias;
        if (a1 > kSvThreshold && a1 < C - kSvThreshold) new_bias = bias_ - e1_shift;
        else if (a2 > kSvThreshold && a2 < C - kSvThreshold) new_bias = bias_ - e2_shift;
        else new_bias = bias_ - 0.5 * (e1_shift + e2_shift);
        double delta_b = new_bias - bias_;

        errors_ += y1 * d1 * K_.col(i1) + y2 * d2 * K_.col(i2);
        errors_.array() += delta_b;
        bias_ = new_bias;
        alpha_(i1) = a1;
        alpha_(i2) = a2;
        return true;
    }

    const Eigen::MatrixXd& K_;
    const Eigen::VectorXd& y_;
    const SvmConfig& cfg_;
    Eigen::Index n_;
    SplitMix64 rng_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd errors_;  // E_i = f(x_i) - y_i
    double bias_;
};

Eigen::VectorXd labels_to_vector(const std::vector<int>& y) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i)) = y[i];
    return out;
}

}  // namespace

double kernel_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const KernelParams& params) {
    check_kernel(params);
    if (x.size() != z.size()) {
        throw Error::data("DimensionMismatch", "kernel arguments differ in dimension");
    }
    double sq = (x - z).squaredNorm();
    return std::exp(-sq / (2.0 * params.sigma * params.sigma));
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
    Eigen::VectorXd norms = X.rowwise().squaredNorm();
    Eigen::MatrixXd d = norms.replicate(1, X.rows()) + norms.transpose().replicate(X.rows(), 1) -
                        2.0 * X * X.transpose();
    return d.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& sq_dist, const KernelParams& params) {
    check_kernel(params);
    return (-sq_dist / (2.0 * params.sigma * params.sigma)).array().exp();
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& params) {
    if (!X.allFinite()) throw Error::data("NonFiniteInput", "kernel matrix input not finite");
    Eigen::MatrixXd K = kernel_from_distances(squared_distances(X), params);
    // Exact symmetry and unit diagonal regardless of floating-point noise in
    // the distance expansion.
    K = 0.5 * (K + K.transpose()).eval();
    K.diagonal().setOnes();
    return K;
}

TrainedModel train_smo(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const KernelParams& kernel, const SvmConfig& cfg) {
    check_labels(X, y);
    check_kernel(kernel);
    Eigen::VectorXd yv = labels_to_vector(y);
    Eigen::MatrixXd K = kernel_matrix(X, kernel);

    SmoResult result = SmoSolver(K, yv, cfg).solve();

    TrainedModel model;
    model.kernel = kernel;
    model.box_constraint = cfg.box_constraint;
    model.solver = Solver::SMO;
    model.bias = result.bias;
    model.iterations = result.passes;
    model.final_kkt_violation = result.final_violation;
    model.converged = result.converged;

    std::vector<int> sv;
    for (Eigen::Index i = 0; i < result.alpha.size(); ++i) {
        if (result.alpha(i) > kSvThreshold) sv.push_back(static_cast<int>(i));
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.alpha.resize(static_cast<Eigen::Index>(sv.size()));
    model.labels.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
        model.alpha(static_cast<Eigen::Index>(k)) = result.alpha(sv[k]);
        model.labels(static_cast<Eigen::Index>(k)) = yv(sv[k]);
    }
    model.sv_indices = std::move(sv);
    return model;
}

TrainedModel train_lssvm(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const KernelParams& kernel, const SvmConfig& cfg) {
    check_labels(X, y);
    check_kernel(kernel);
    const Eigen::Index n = X.rows();
    Eigen::VectorXd yv = labels_to_vector(y);
    Eigen::MatrixXd K = kernel_matrix(X, kernel);

    double gamma = cfg.box_constraint;  // gamma = C convention
    Eigen::MatrixXd A(n + 1, n + 1);
    A(0, 0) = 0.0;
    A.block(0, 1, 1, n) = yv.transpose();
    A.block(1, 0, n, 1) = yv;
    A.block(1, 1, n, n) =
        yv.asDiagonal() * K * yv.asDiagonal() + Eigen::MatrixXd::Identity(n, n) / gamma;

    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n + 1);
    rhs(0) = 0.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - A * sol);  // one refinement step
    double residual = (A * sol - rhs).lpNorm<Eigen::Infinity>();
    if (!sol.allFinite() || residual >= 1e-8) {
        throw Error::compute("SingularSystem",
                             "least-squares system residual " + std::to_string(residual));
    }

    TrainedModel model;
    model.kernel = kernel;
    model.box_constraint = cfg.box_constraint;
    model.solver = Solver::LEAST_SQUARES;
    model.bias = sol(0);
    model.alpha = sol.tail(n);
    model.labels = yv;
    model.support_vectors = X;
    model.sv_indices.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) model.sv_indices[static_cast<std::size_t>(i)] = static_cast<int>(i);
    model.iterations = 1;
    model.converged = true;
    return model;
}

TrainedModel train(const Eigen::MatrixXd& X, const std::vector<int>& y,
                   const KernelParams& kernel, const SvmConfig& cfg) {
    return cfg.solver == Solver::SMO ? train_smo(X, y, kernel, cfg)
                                     : train_lssvm(X, y, kernel, cfg);
}

double decision_value(const TrainedModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.support_vectors.cols()) {
        throw Error::data("DimensionMismatch", "input dimension differs from training");
    }
    double f = model.bias;
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
        f += model.alpha(i) * model.labels(i) *
             kernel_eval(model.support_vectors.row(i).transpose(), x, model.kernel);
    }
    return f;
}

int predict_label(const TrainedModel& model, const Eigen::VectorXd& x) {
    return decision_value(model, x) > 0.0 ? 1 : -1;
}

std::vector<int> predict_labels(const TrainedModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.support_vectors.cols()) {
        throw Error::data("DimensionMismatch", "input dimension differs from training");
    }
    const double two_sigma_sq = 2.0 * model.kernel.sigma * model.kernel.sigma;
    Eigen::VectorXd sv_norms = model.support_vectors.rowwise().squaredNorm();
    Eigen::VectorXd weighted = model.alpha.cwiseProduct(model.labels);
    std::vector<int> labels(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        Eigen::VectorXd sq = sv_norms;
        sq.array() += X.row(r).squaredNorm();
        sq -= 2.0 * model.support_vectors * X.row(r).transpose();
        double f = model.bias +
                   ((-sq.cwiseMax(0.0) / two_sigma_sq).array().exp() * weighted.array()).sum();
        labels[static_cast<std::size_t>(r)] = f > 0.0 ? 1 : -1;
    }
    return labels;
}

double dual_objective(const TrainedModel& model) {
    Eigen::MatrixXd K = kernel_matrix(model.support_vectors, model.kernel);
    Eigen::VectorXd weighted = model.alpha.cwiseProduct(model.labels);
    return model.alpha.sum() - 0.5 * weighted.dot(K * weighted);
}

double kkt_violation_fraction(const TrainedModel& model, const Eigen::MatrixXd& X,
                              const std::vector<int>& y, const SvmConfig& cfg) {
    if (model.solver != Solver::SMO) {
        throw Error::data("WrongSolver", "KKT box conditions apply to SMO models only");
    }
    if (model.sv_indices.empty()) return 0.0;
    const double C = model.box_constraint;
    int violations = 0;
    for (std::size_t k = 0; k < model.sv_indices.size(); ++k) {
        int i = model.sv_indices[k];
        double margin = static_cast<double>(y[static_cast<std::size_t>(i)]) *
                        decision_value(model, X.row(i).transpose());
        double a = model.alpha(static_cast<Eigen::Index>(k));
        bool at_upper = a >= C - kSvThreshold;
        bool violated = at_upper ? (margin > 1.0 + cfg.kkt_tolerance)
                                 : (std::abs(margin - 1.0) > cfg.kkt_tolerance);
        if (violated) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(model.sv_indices.size());
}

std::vector<double> default_sigma_grid(const Eigen::MatrixXd& X) {
    // Median pairwise distance heuristic for the grid center.
    Eigen::MatrixXd d = squared_distances(X);
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(X.rows()) * (X.rows() - 1) / 2);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
            double v = std::sqrt(d(i, j));
            if (v > 0.0) dists.push_back(v);
        }
    double center = 1.0;
    if (!dists.empty()) {
        std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
        center = dists[dists.size() / 2];
    }
    std::vector<double> grid;
    for (int e = -4; e <= 4; ++e) grid.push_back(center * std::ldexp(1.0, e));
    return grid;
}

std::vector<double> default_c_grid() {
    std::vector<double> grid;
    for (int e = -4; e <= 4; ++e) grid.push_back(std::ldexp(1.0, e));
    return grid;
}

GridSearchResult grid_search(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             const dataset::Partition& partition,
                             const std::vector<double>& sigma_grid,
                             const std::vector<double>& c_grid, const SvmConfig& cfg) {
    if (sigma_grid.empty() || c_grid.empty()) {
        throw Error::config("EmptyGrid", "hyperparameter grids must be non-empty");
    }
    check_labels(X, y);

    Eigen::MatrixXd X_train(static_cast<Eigen::Index>(partition.train_rows.size()), X.cols());
    std::vector<int> y_train(partition.train_rows.size());
    for (std::size_t i = 0; i < partition.train_rows.size(); ++i) {
        X_train.row(static_cast<Eigen::Index>(i)) = X.row(partition.train_rows[i]);
        y_train[i] = y[static_cast<std::size_t>(partition.train_rows[i])];
    }
    Eigen::MatrixXd X_hold(static_cast<Eigen::Index>(partition.holdout_rows.size()), X.cols());
    std::vector<int> y_hold(partition.holdout_rows.size());
    for (std::size_t i = 0; i < partition.holdout_rows.size(); ++i) {
        X_hold.row(static_cast<Eigen::Index>(i)) = X.row(partition.holdout_rows[i]);
        y_hold[i] = y[static_cast<std::size_t>(partition.holdout_rows[i])];
    }

    GridSearchResult result;
    bool have_best = false;
    double best_accuracy = -1.0;
    for (double sigma : sigma_grid) {
        for (double c : c_grid) {
            SvmConfig point_cfg = cfg;
            point_cfg.box_constraint = c;
            KernelParams kernel{sigma};
            TrainedModel model = train(X_train, y_train, kernel, point_cfg);
            std::vector<int> predicted = predict_labels(model, X_hold);
            int correct = 0;
            for (std::size_t i = 0; i < y_hold.size(); ++i)
                if (predicted[i] == y_hold[i]) ++correct;
            double accuracy = y_hold.empty()
                                  ? 0.0
                                  : static_cast<double>(correct) / static_cast<double>(y_hold.size());
            result.table.push_back({sigma, c, accuracy});

            bool better = !have_best || accuracy > best_accuracy ||
                          (accuracy == best_accuracy &&
                           (c < result.best_c ||
                            (c == result.best_c && sigma < result.best_kernel.sigma)));
            if (better) {
                result.best_kernel = kernel;
                result.best_c = c;
                best_accuracy = accuracy;
                have_best = true;
            }
        }
    }
    return result;
}

std::string serialize_model(const TrainedModel& model) {
    nlohmann::json j;
    j["format"] = "stockpick-model-v1";
    j["solver"] = model.solver == Solver::SMO ? "smo" : "least_squares";
    j["kernel"] = {{"type", "gaussian"}, {"sigma", model.kernel.sigma}};
    j["box_constraint"] = model.box_constraint;
    j["bias"] = model.bias;
    j["alpha"] = std::vector<double>(model.alpha.data(), model.alpha.data() + model.alpha.size());
    j["labels"] = std::vector<double>(model.labels.data(),
                                      model.labels.data() + model.labels.size());
    j["sv_indices"] = model.sv_indices;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        rows.emplace_back(model.support_vectors.row(i).begin(), model.support_vectors.row(i).end());
    }
    j["support_vectors"] = rows;
    j["iterations"] = model.iterations;
    j["final_kkt_violation"] = model.final_kkt_violation;
    j["converged"] = model.converged;

    // FNV-1a over the training-configuration fields, for manifest matching.
    std::string cfg_text = j["solver"].get<std::string>() + "|" +
                           csv::format_double(model.kernel.sigma) + "|" +
                           csv::format_double(model.box_constraint);
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : cfg_text) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    j["config_hash"] = hash;
    return j.dump(2) + "\n";
}

TrainedModel deserialize_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error::data("MalformedRow", std::string("model JSON: ") + e.what());
    }
    if (j.value("format", "") != "stockpick-model-v1") {
        throw Error::data("MalformedRow", "unknown model format");
    }
    TrainedModel model;
    model.solver = j.at("solver").get<std::string>() == "smo" ? Solver::SMO
                                                              : Solver::LEAST_SQUARES;
    model.kernel.sigma = j.at("kernel").at("sigma").get<double>();
    model.box_constraint = j.at("box_constraint").get<double>();
    model.bias = j.at("bias").get<double>();
    auto alpha = j.at("alpha").get<std::vector<double>>();
    auto labels = j.at("labels").get<std::vector<double>>();
    model.sv_indices = j.at("sv_indices").get<std::vector<int>>();
    auto rows = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    if (alpha.size() != labels.size() || alpha.size() != rows.size()) {
        throw Error::data("MalformedRow", "model arrays misaligned");
    }
    model.alpha = Eigen::Map<Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    model.labels =
        Eigen::Map<Eigen::VectorXd>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    model.support_vectors.resize(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != cols) {
            throw Error::data("MalformedRow", "ragged support vector rows");
        }
        model.support_vectors.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<Eigen::VectorXd>(rows[i].data(), cols).transpose();
    }
    model.iterations = j.value("iterations", 0);
    model.final_kkt_violation = j.value("final_kkt_violation", 0.0);
    model.converged = j.value("converged", true);
    return model;
}

}  // namespace stockpick::svm
