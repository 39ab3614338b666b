#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "stockpick/errors.hpp"
#include "stockpick/rng.hpp"
#include "stockpick/svm.hpp"

using namespace stockpick;
using namespace stockpick::svm;

namespace {

// Tight SMO settings used when comparing against the exact QP oracle.
SvmConfig strict_smo(double c = 0.8) {
    SvmConfig cfg;
    cfg.solver = Solver::SMO;
    cfg.box_constraint = c;
    cfg.kkt_violation_fraction = 0.0;
    cfg.kkt_tolerance = 1e-8;
    cfg.max_passes = 100000;
    return cfg;
}

struct Blobs {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

Blobs separated_blobs(SplitMix64& rng, int per_class, int dim, double gap = 6.0) {
    Blobs b;
    b.X.resize(2 * per_class, dim);
    for (int i = 0; i < 2 * per_class; ++i) {
        int label = i < per_class ? -1 : 1;
        for (int d = 0; d < dim; ++d) {
            b.X(i, d) = 0.5 * gap * label + rng.next_normal();
        }
        b.y.push_back(label);
    }
    return b;
}

}  // namespace

TEST_CASE("kernel_eval closed-form values") {
    Eigen::VectorXd x(2), z(2);
    x << 1.0, 2.0;
    z = x;
    KernelParams p{1.0};
    CHECK(kernel_eval(x, z, p) == 1.0);

    z << 1.0, 3.0;  // distance 1
    CHECK(kernel_eval(x, z, p) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    Eigen::VectorXd a(1), b(1);
    a << 0.0;
    b << std::sqrt(8.0);  // squared distance 8, sigma 2
    CHECK(kernel_eval(a, b, KernelParams{2.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Eigen::VectorXd wrong(3);
    CHECK_THROWS_WITH_AS(kernel_eval(x, wrong, p), doctest::Contains("DimensionMismatch"), Error);
    CHECK_THROWS_AS(kernel_eval(x, z, KernelParams{0.0}), Error);
}

TEST_CASE("kernel_matrix is symmetric, unit-diagonal, and PSD") {
    SplitMix64 rng(3);
    SUBCASE("single row") {
        Eigen::MatrixXd X(1, 4);
        for (int c = 0; c < 4; ++c) X(0, c) = rng.next_normal();
        auto K = kernel_matrix(X, KernelParams{1.5});
        CHECK(K.rows() == 1);
        CHECK(K(0, 0) == 1.0);
    }
    SUBCASE("duplicated row gives a unit off-diagonal entry") {
        Eigen::MatrixXd X(3, 2);
        X << 1, 2, 1, 2, 5, 6;
        auto K = kernel_matrix(X, KernelParams{1.0});
        CHECK(K(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("random rows: symmetric with non-negative spectrum") {
        Eigen::MatrixXd X(6, 3);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 3; ++c) X(r, c) = rng.next_normal();
        auto K = kernel_matrix(X, KernelParams{2.0});
        CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        for (int i = 0; i < 6; ++i) CHECK(K(i, i) == 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("train_smo on the symmetric two-point problem") {
    Eigen::MatrixXd X(2, 1);
    X << -1.0, 1.0;
    std::vector<int> y{-1, 1};
    auto model = train_smo(X, y, KernelParams{1.0}, strict_smo());
    CHECK(model.converged);
    CHECK(model.alpha.size() == 2);
    CHECK(model.alpha(0) == doctest::Approx(model.alpha(1)).epsilon(1e-10));
    CHECK(std::abs(model.bias) < 1e-10);
    CHECK(predict_label(model, X.row(0).transpose()) == -1);
    CHECK(predict_label(model, X.row(1).transpose()) == 1);
}

TEST_CASE("train_smo rejects single-class input") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.0;
    CHECK_THROWS_WITH_AS(train_smo(X, {1, 1}, KernelParams{1.0}, strict_smo()),
                         doctest::Contains("SingleClassInput"), Error);
}

TEST_CASE("train_smo solves XOR and matches the brute-force QP oracle") {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 1, 1, 0, 1, 1, 0;
    std::vector<int> y{1, 1, -1, -1};
    KernelParams kernel{0.7};
    auto cfg = strict_smo(5.0);
    auto model = train_smo(X, y, kernel, cfg);
    REQUIRE(model.converged);
    for (int i = 0; i < 4; ++i) {
        CHECK(predict_label(model, X.row(i).transpose()) == y[static_cast<std::size_t>(i)]);
    }
    Eigen::VectorXd yv(4);
    yv << 1, 1, -1, -1;
    auto oracle = oracles::qp_brute_force(kernel_matrix(X, kernel), yv, cfg.box_constraint);
    REQUIRE(oracle.found);
    CHECK(dual_objective(model) == doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("train_smo matches the QP oracle across random small instances") {
    SplitMix64 rng(2024);
    int oracle_label_mismatches = 0;
    for (int trial = 0; trial < 40; ++trial) {
        int n = 3 + static_cast<int>(rng.next_below(6));  // 3..8 points
        int dim = 1 + static_cast<int>(rng.next_below(3));
        Eigen::MatrixXd X(n, dim);
        std::vector<int> y;
        Eigen::VectorXd yv(n);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < dim; ++d) X(i, d) = 2.0 * rng.next_normal();
            int label = i < n / 2 ? -1 : 1;  // both classes guaranteed
            y.push_back(label);
            yv(i) = label;
        }
        KernelParams kernel{0.5 + 2.0 * rng.next_double()};
        double c = 0.4 + rng.next_double();
        auto cfg = strict_smo(c);
        auto model = train_smo(X, y, kernel, cfg);
        REQUIRE(model.converged);

        // Dual feasibility.
        for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
            CHECK(model.alpha(i) >= -1e-10);
            CHECK(model.alpha(i) <= c + 1e-10);
        }
        CHECK(std::abs(model.alpha.dot(model.labels)) < 1e-8);

        auto oracle = oracles::qp_brute_force(kernel_matrix(X, kernel), yv, c);
        REQUIRE(oracle.found);
        CHECK(dual_objective(model) <= oracle.objective + 1e-9);
        CHECK(dual_objective(model) == doctest::Approx(oracle.objective).epsilon(1e-6));

        // With a Gaussian kernel on distinct points the dual optimum is unique,
        // so the bias-free decision parts must agree. The bias itself (and
        // hence the labels) is only pinned when some alpha is strictly inside
        // the box; compare labels just in that case.
        bool bias_pinned = false;
        for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
            if (model.alpha(i) > 1e-6 && model.alpha(i) < c - 1e-6) bias_pinned = true;
        }
        double oracle_bias = oracles::qp_bias(kernel_matrix(X, kernel), yv, oracle.alpha, c);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd row_k = kernel_matrix(X, kernel).row(i).transpose();
            double oracle_raw = oracle.alpha.cwiseProduct(yv).dot(row_k);
            double model_raw = decision_value(model, X.row(i).transpose()) - model.bias;
            CHECK(model_raw == doctest::Approx(oracle_raw).epsilon(1e-4));
            if (bias_pinned) {
                double f = oracle_raw + oracle_bias;
                int oracle_label = f > 0 ? 1 : -1;
                if (predict_label(model, X.row(i).transpose()) != oracle_label)
                    ++oracle_label_mismatches;
            }
        }
    }
    CHECK(oracle_label_mismatches == 0);
}

TEST_CASE("train_lssvm symmetric two-point case and residual contract") {
    Eigen::MatrixXd X(2, 1);
    X << -1.0, 1.0;
    std::vector<int> y{-1, 1};
    SvmConfig cfg;
    cfg.box_constraint = 0.8;
    auto model = train_lssvm(X, y, KernelParams{1.0}, cfg);
    CHECK(model.alpha(0) == doctest::Approx(model.alpha(1)).epsilon(1e-10));
    CHECK(std::abs(model.bias) < 1e-10);
    CHECK(model.sv_indices.size() == 2);  // all points are support vectors

    // Definitional residual check of the saddle system.
    Eigen::VectorXd yv(2);
    yv << -1, 1;
    auto K = kernel_matrix(X, model.kernel);
    Eigen::MatrixXd A(3, 3);
    A(0, 0) = 0;
    A.block(0, 1, 1, 2) = yv.transpose();
    A.block(1, 0, 2, 1) = yv;
    A.block(1, 1, 2, 2) = yv.asDiagonal() * K * yv.asDiagonal() +
                          Eigen::MatrixXd::Identity(2, 2) / cfg.box_constraint;
    Eigen::VectorXd sol(3);
    sol << model.bias, model.alpha(0), model.alpha(1);
    Eigen::VectorXd rhs(3);
    rhs << 0, 1, 1;
    CHECK((A * sol - rhs).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("train_lssvm agrees with train_smo on separable blobs") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        auto blobs = separated_blobs(rng, 10, 3);
        KernelParams kernel{3.0};
        SvmConfig ls_cfg;
        ls_cfg.box_constraint = 1.0;
        auto ls = train_lssvm(blobs.X, blobs.y, kernel, ls_cfg);
        auto smo = train_smo(blobs.X, blobs.y, kernel, strict_smo(1.0));
        auto ls_labels = predict_labels(ls, blobs.X);
        auto smo_labels = predict_labels(smo, blobs.X);
        CHECK(ls_labels == smo_labels);
        CHECK(ls_labels == blobs.y);
    }
}

TEST_CASE("decision_value tie rule and direct-summation agreement") {
    SplitMix64 rng(66);
    auto blobs = separated_blobs(rng, 6, 2);
    SvmConfig cfg;
    auto model = train_lssvm(blobs.X, blobs.y, KernelParams{2.0}, cfg);

    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(2);
        x << 4.0 * rng.next_normal(), 4.0 * rng.next_normal();
        double f = 0.0;
        for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
            double sq = (model.support_vectors.row(i).transpose() - x).squaredNorm();
            f += model.alpha(i) * model.labels(i) * std::exp(-sq / (2.0 * 4.0));
        }
        f += model.bias;
        CHECK(decision_value(model, x) == doctest::Approx(f).epsilon(1e-10));
        CHECK(predict_label(model, x) == (f > 0 ? 1 : -1));
    }

    // sign(0) -> -1 by contract.
    TrainedModel degenerate = model;
    degenerate.alpha.setZero();
    degenerate.bias = 0.0;
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
    CHECK(decision_value(degenerate, origin) == 0.0);
    CHECK(predict_label(degenerate, origin) == -1);
}

TEST_CASE("decision values are invariant under training-row permutation") {
    SplitMix64 rng(77);
    auto blobs = separated_blobs(rng, 8, 2);
    SvmConfig cfg;
    auto model = train_lssvm(blobs.X, blobs.y, KernelParams{2.0}, cfg);

    // Reverse the rows and retrain.
    Eigen::MatrixXd Xr = blobs.X.colwise().reverse();
    std::vector<int> yr(blobs.y.rbegin(), blobs.y.rend());
    auto model_r = train_lssvm(Xr, yr, KernelParams{2.0}, cfg);

    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd x(2);
        x << 3.0 * rng.next_normal(), 3.0 * rng.next_normal();
        CHECK(decision_value(model, x) == doctest::Approx(decision_value(model_r, x)).epsilon(1e-10));
    }
}

TEST_CASE("kkt_violation_fraction contract") {
    SplitMix64 rng(88);
    auto blobs = separated_blobs(rng, 8, 2);
    SUBCASE("separable converged instance has zero violations") {
        auto model = train_smo(blobs.X, blobs.y, KernelParams{3.0}, strict_smo(10.0));
        REQUIRE(model.converged);
        CHECK(kkt_violation_fraction(model, blobs.X, blobs.y, strict_smo(10.0)) == 0.0);
    }
    SUBCASE("converged default-config model satisfies the 10% allowance") {
        SvmConfig cfg;
        cfg.solver = Solver::SMO;
        auto model = train_smo(blobs.X, blobs.y, KernelParams{3.0}, cfg);
        REQUIRE(model.converged);
        CHECK(kkt_violation_fraction(model, blobs.X, blobs.y, cfg) <= 0.10);
    }
    SUBCASE("a planted violator among 5 support vectors counts as 0.2") {
        Eigen::MatrixXd X(5, 1);
        X << -2, -1, 0, 1, 2;
        std::vector<int> y{-1, -1, -1, 1, 1};
        TrainedModel model;
        model.solver = Solver::SMO;
        model.kernel = KernelParams{1.0};
        model.box_constraint = 1.0;
        model.support_vectors = X;
        model.alpha = Eigen::VectorXd::Constant(5, 0.5);
        model.labels.resize(5);
        for (int i = 0; i < 5; ++i) model.labels(i) = y[static_cast<std::size_t>(i)];
        model.sv_indices = {0, 1, 2, 3, 4};
        model.bias = 0.0;
        SvmConfig cfg;
        cfg.kkt_tolerance = 1e-3;
        // Free alphas require |y f - 1| <= tol; count how many planted rows
        // violate, then check the function reports exactly that fraction.
        int violators = 0;
        for (int i = 0; i < 5; ++i) {
            double margin = y[static_cast<std::size_t>(i)] *
                            decision_value(model, X.row(i).transpose());
            if (std::abs(margin - 1.0) > cfg.kkt_tolerance) ++violators;
        }
        CHECK(kkt_violation_fraction(model, X, y, cfg) ==
              doctest::Approx(violators / 5.0).epsilon(1e-12));
    }
    SUBCASE("least-squares models are rejected") {
        SvmConfig cfg;
        auto ls = train_lssvm(blobs.X, blobs.y, KernelParams{3.0}, cfg);
        CHECK_THROWS_WITH_AS(kkt_violation_fraction(ls, blobs.X, blobs.y, cfg),
                             doctest::Contains("WrongSolver"), Error);
    }
}

TEST_CASE("grid_search selects the planted optimum and breaks ties deterministically") {
    SplitMix64 rng(99);
    auto blobs = separated_blobs(rng, 15, 2, 3.0);
    auto partition = dataset::random_partition(30, 0.8, 321);
    SvmConfig cfg;

    SUBCASE("single grid point is returned") {
        auto result = grid_search(blobs.X, blobs.y, partition, {1.25}, {0.5}, cfg);
        CHECK(result.best_kernel.sigma == 1.25);
        CHECK(result.best_c == 0.5);
        CHECK(result.table.size() == 1);
    }
    SUBCASE("exhaustive scoring picks the argmax of the table") {
        auto sigma_grid = default_sigma_grid(blobs.X);
        auto c_grid = default_c_grid();
        CHECK(sigma_grid.size() == 9);
        CHECK(c_grid.size() == 9);
        CHECK(c_grid.front() == doctest::Approx(1.0 / 16.0));
        CHECK(c_grid.back() == doctest::Approx(16.0));
        auto result = grid_search(blobs.X, blobs.y, partition, sigma_grid, c_grid, cfg);
        double best = -1.0;
        for (const auto& score : result.table) best = std::max(best, score.holdout_accuracy);
        // The selected point attains the max, with the tie rule.
        for (const auto& score : result.table) {
            if (score.holdout_accuracy == best) {
                bool selected_not_worse =
                    result.best_c < score.c ||
                    (result.best_c == score.c && result.best_kernel.sigma <= score.sigma);
                CHECK(selected_not_worse);
            }
            if (score.sigma == result.best_kernel.sigma && score.c == result.best_c) {
                CHECK(score.holdout_accuracy == best);
            }
        }
    }
    SUBCASE("empty grid is an error") {
        CHECK_THROWS_WITH_AS(grid_search(blobs.X, blobs.y, partition, {}, {1.0}, cfg),
                             doctest::Contains("EmptyGrid"), Error);
    }
}

TEST_CASE("model JSON serialization round-trips bit-exactly") {
    SplitMix64 rng(111);
    auto blobs = separated_blobs(rng, 6, 3);
    SvmConfig cfg;
    for (auto solver : {Solver::LEAST_SQUARES, Solver::SMO}) {
        cfg.solver = solver;
        auto model = train(blobs.X, blobs.y, KernelParams{1.7}, cfg);
        auto text = serialize_model(model);
        auto restored = deserialize_model(text);
        CHECK(restored.solver == model.solver);
        CHECK(restored.kernel.sigma == model.kernel.sigma);
        CHECK(restored.box_constraint == model.box_constraint);
        CHECK(restored.bias == model.bias);
        REQUIRE(restored.alpha.size() == model.alpha.size());
        CHECK((restored.alpha - model.alpha).cwiseAbs().maxCoeff() == 0.0);
        CHECK((restored.support_vectors - model.support_vectors).cwiseAbs().maxCoeff() == 0.0);
        CHECK(restored.sv_indices == model.sv_indices);
        // Serializing the restored model reproduces the bytes.
        CHECK(serialize_model(restored) == text);
    }
}
