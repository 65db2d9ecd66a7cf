#include "fixtures.hpp"
#include "ssr/errors.hpp"
#include "ssr/model.hpp"
#include "ssr/solver.hpp"

#include <gtest/gtest.h>

using namespace ssr;

namespace {

double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

DesignPtr make_design(const Dims& d, const BasisSet& b) { return SsrDesign::build(d, b); }

}  // namespace

TEST(DifferenceOperator, ScalarExample) {
    Mat d = Mat(build_difference_operator(1, 1, 3));
    Mat expect(2, 3);
    expect << -1, 1, 0, 0, -1, 1;
    EXPECT_EQ(d, expect);
}

TEST(DifferenceOperator, RowStructure) {
    SpMat d = build_difference_operator(3, 2, 4);
    EXPECT_EQ(d.rows(), 18);
    EXPECT_EQ(d.cols(), 24);
    Mat dd(d);
    for (Index r = 0; r < dd.rows(); ++r) {
        EXPECT_EQ(dd(r, r), -1.0);
        EXPECT_EQ(dd(r, r + 6), 1.0);
        EXPECT_EQ(dd.row(r).cwiseAbs().sum(), 2.0);
    }
}

TEST(DifferenceOperator, ConstantInTimeIsNullSpace) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(31);
    Vec slice = oracle::random_vector(g, 6);
    Vec theta = slice.replicate(4, 1);
    EXPECT_EQ((build_difference_operator(3, 2, 4) * theta).norm(), 0.0);
    EXPECT_EQ(apply_difference(theta, d).norm(), 0.0);
}

TEST(DifferenceOperator, MatchesSliceDifferences) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(32);
    Tensor3 t = oracle::random_tensor(g, d);
    Vec expect(18);
    for (Index s = 1; s < 4; ++s)
        for (Index j = 0; j < 2; ++j)
            for (Index i = 0; i < 3; ++i) expect[(s - 1) * 6 + i + 3 * j] = t(i, j, s) - t(i, j, s - 1);
    EXPECT_LT(rel_err(Vec(build_difference_operator(3, 2, 4) * t.data()), expect), 1e-15);
    EXPECT_LT(rel_err(apply_difference(t.data(), d), expect), 1e-15);
}

TEST(DifferenceOperator, NeedsTwoSteps) { EXPECT_THROW(build_difference_operator(2, 2, 1), ConfigError); }

TEST(Augmentation, ScalarExample) {
    Augmentation a = build_augmentation(1, 1, 3);
    Mat expect_a(1, 3), expect_d(3, 3);
    expect_a << 1, 1, 1;
    expect_d << -1, 1, 0, 0, -1, 1, 1, 1, 1;
    EXPECT_EQ(Mat(a.a), expect_a);
    EXPECT_EQ(Mat(a.d_tilde), expect_d);
    EXPECT_NE(Mat(a.d_tilde).determinant(), 0.0);
}

TEST(Augmentation, RowsOrthogonalToDifferences) {
    Augmentation a = build_augmentation(3, 2, 5);
    SpMat d = build_difference_operator(3, 2, 5);
    EXPECT_EQ(Mat(a.a * SpMat(d.transpose())).norm(), 0.0);
}

TEST(Augmentation, InverseOperatorMatchesDense) {
    Dims d{3, 2, 5};
    Augmentation a = build_augmentation(3, 2, 5);
    Mat dt(a.d_tilde);
    Mat inv = dt.inverse();
    EXPECT_LT((inv * dt - Mat::Identity(30, 30)).norm(), 1e-10);
    DesignPtr des = make_design(d, BasisSet::identity(d));
    std::mt19937_64 g(33);
    for (int k = 0; k < 5; ++k) {
        Vec b = oracle::random_vector(g, 30);
        EXPECT_LT(rel_err(des->dtilde_inv(b), inv * b), 1e-12);
        EXPECT_LT(rel_err(des->dtilde_inv_t(b), inv.transpose() * b), 1e-12);
        EXPECT_LT(rel_err(Vec(dt * des->dtilde_inv(b)), b), 1e-12);
    }
}

TEST(SolveThetaM, IdentityBasesReturnData) {
    Dims d{2, 2, 3};
    std::mt19937_64 g(34);
    Tensor3 y = oracle::random_tensor(g, d);
    SsrProblem p = make_problem(make_design(d, BasisSet::identity(d)), y);
    EXPECT_LT(rel_err(solve_theta_m(p, Vec::Zero(12)), y.data()), 1e-14);
    EXPECT_LT(solve_theta_m(p, y.data()).norm(), 1e-14);
    EXPECT_THROW(solve_theta_m(p, Vec::Zero(11)), ShapeError);
}

TEST(SolveThetaM, MatchesDenseNormalEquations) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(35);
    BasisSet b = fixture::random_bases(g, d, false);
    Tensor3 y = oracle::random_tensor(g, d);
    SsrProblem p = make_problem(make_design(d, b), y);
    Vec th = oracle::random_vector(g, 24);
    Mat bm = fixture::dense_mean_basis(b);
    Vec expect = (bm.transpose() * bm).ldlt().solve(bm.transpose() * (y.data() - th));
    EXPECT_LT(rel_err(solve_theta_m(p, th), expect), 1e-8);
}

TEST(YStar, IdentityMeanGivesZero) {
    Dims d{2, 2, 3};
    std::mt19937_64 g(36);
    SsrProblem p = make_problem(make_design(d, BasisSet::identity(d)), oracle::random_tensor(g, d));
    EXPECT_LT(p.y_star.norm(), 1e-14);
}

TEST(YStar, OrthogonalComplementIsUnchanged) {
    Dims d{3, 2, 3};
    std::mt19937_64 g(37);
    BasisSet b = fixture::random_bases(g, d, true);
    Mat h = fixture::dense_mean_projector(b);
    Vec v = oracle::random_vector(g, 18);
    Vec y = v - h * v;
    SsrProblem p = make_problem(make_design(d, b), Tensor3(d, y));
    EXPECT_LT(rel_err(p.y_star, y), 1e-10);
}

TEST(YStar, MatchesDenseProjector) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(38);
    for (bool deficient : {false, true}) {
        BasisSet b = fixture::random_bases(g, d, deficient);
        Tensor3 y = oracle::random_tensor(g, d);
        SsrProblem p = make_problem(make_design(d, b), y);
        Mat h = fixture::dense_mean_projector(b);
        EXPECT_LT(rel_err(p.y_star, y.data() - h * y.data()), 1e-9);
    }
}

TEST(MeanProjector, IdempotentAndSymmetric) {
    Dims d{4, 3, 5};
    std::mt19937_64 g(39);
    DesignPtr des = make_design(d, fixture::random_bases(g, d, true));
    for (int k = 0; k < 20; ++k) {
        Vec u = oracle::random_vector(g, d.size()), v = oracle::random_vector(g, d.size());
        Vec hu = des->project_mean(u);
        EXPECT_LE((des->project_mean(hu) - hu).norm(), 1e-8 * u.norm());
        EXPECT_NEAR(hu.dot(v), u.dot(des->project_mean(v)), 1e-10 * u.norm() * v.norm());
    }
}

TEST(Transform, ObjectiveEquivalence) {
    std::mt19937_64 g(40);
    for (Dims d : {Dims{3, 2, 4}, Dims{2, 2, 3}}) {
        for (int draw = 0; draw < 5; ++draw) {
            BasisSet b = fixture::random_bases(g, d, true);
            SsrProblem p = make_problem(make_design(d, b), oracle::random_tensor(g, d));
            ReducedLasso lasso = transform_to_lasso(p);
            const Index nb1 = p.design->n_beta1();
            Vec b1 = oracle::random_vector(g, nb1), b2 = oracle::random_vector(g, d.slice());
            const double l2 = 0.3;
            Vec theta = back_transform(*p.design, b1, b2);
            double lhs = ssr_objective(p, theta, 0.0, l2);
            double rhs = lasso_objective(lasso, b1, l2) + eliminated_quadratic(lasso, b1, b2);
            EXPECT_NEAR(lhs, rhs, 1e-8 * std::abs(lhs));
        }
    }
}

TEST(Transform, BackTransformReproducesDifferences) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(41);
    DesignPtr des = make_design(d, BasisSet::identity(d));
    Vec b1 = oracle::random_vector(g, 18), b2 = oracle::random_vector(g, 6);
    Vec theta = back_transform(*des, b1, b2);
    EXPECT_LT(rel_err(apply_difference(theta, d), b1), 1e-12);
    Vec sums = Vec::Zero(6);
    for (Index t = 0; t < 4; ++t) sums += theta.segment(t * 6, 6);
    EXPECT_LT(rel_err(sums, b2), 1e-12);
}

TEST(Transform, ZeroDifferencesGiveConstantTheta) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(42);
    DesignPtr des = make_design(d, BasisSet::identity(d));
    Vec theta = back_transform(*des, Vec::Zero(18), oracle::random_vector(g, 6));
    for (Index t = 1; t < 4; ++t) EXPECT_LT((theta.segment(t * 6, 6) - theta.head(6)).norm(), 1e-14);
}

TEST(Transform, MaterializedBlocksMatchDenseSplit) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(43);
    BasisSet b = fixture::random_bases(g, d, true);
    SsrProblem p = make_problem(make_design(d, b), oracle::random_tensor(g, d));
    ReducedLasso lasso = transform_to_lasso(p);
    ReducedLasso::Dense m = lasso.materialize();

    Mat x = Mat::Identity(24, 24) - fixture::dense_mean_projector(b);
    Mat xd = x * Mat(build_augmentation(3, 2, 4).d_tilde).inverse();
    EXPECT_LT((m.x1 - xd.leftCols(18)).norm(), 1e-9 * std::max(1.0, xd.norm()));
    EXPECT_LT((m.x2 - xd.rightCols(6)).norm(), 1e-9 * std::max(1.0, xd.norm()));
    EXPECT_LT((m.p * m.p - m.p).norm(), 1e-7);
    EXPECT_LT((m.p - m.p.transpose()).norm(), 1e-7);
    EXPECT_LT((m.x_tilde - (Mat::Identity(24, 24) - m.p) * m.x1).norm(), 1e-9);
    EXPECT_LT(rel_err(m.y_tilde, p.y_star - m.p * p.y_star), 1e-7);
}

TEST(Transform, LipschitzIsLargestEigenvalue) {
    Dims d{3, 2, 4};
    std::mt19937_64 g(44);
    SsrProblem p = make_problem(make_design(d, fixture::random_bases(g, d, true)), oracle::random_tensor(g, d));
    ReducedLasso::Dense m = transform_to_lasso(p).materialize();
    Eigen::SelfAdjointEigenSolver<Mat> es(m.x_tilde.transpose() * m.x_tilde, Eigen::EigenvaluesOnly);
    double lmax = es.eigenvalues().maxCoeff();
    EXPECT_GE(p.design->lipschitz(), lmax * (1 - 1e-5));
    EXPECT_LE(p.design->lipschitz(), lmax * 1.02);
}

TEST(Fit, MeanNormalEquationsHold) {
    Dims d{4, 3, 6};
    std::mt19937_64 g(45);
    BasisSet b = fixture::random_bases(g, d, true);
    Tensor3 y = oracle::random_tensor(g, d);
    SsrProblem p = make_problem(make_design(d, b), y);
    SsrFit f = fit(p, 0.05, 0.2);
    Mat bm = fixture::dense_mean_basis(b);
    Vec r = bm.transpose() * (y.data() - f.mu_hat - f.h_hat);
    EXPECT_LE(r.norm(), 1e-6 * std::max(1.0, (bm.transpose() * y.data()).norm()));
    EXPECT_LT((f.residual - (y.data() - f.mu_hat - f.h_hat)).norm(), 1e-12);
}

TEST(Design, RejectsMismatchedData) {
    Dims d{2, 2, 3};
    DesignPtr des = make_design(d, BasisSet::identity(d));
    EXPECT_THROW(make_problem(des, Tensor3({2, 2, 4})), ShapeError);
    EXPECT_THROW(SsrDesign::build({2, 2, 1}, BasisSet::identity({2, 2, 1})), ConfigError);
    Tensor3 bad(d);
    bad(0, 0, 0) = std::nan("");
    EXPECT_THROW(make_problem(des, bad), NumericalError);
}
