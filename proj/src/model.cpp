#include "ssr/model.hpp"

#include "ssr/errors.hpp"
#include "ssr/linalg.hpp"

#include <cmath>
#include <vector>

namespace ssr {

std::shared_ptr<const SsrDesign> SsrDesign::build(const Dims& dims, const BasisSet& bases, const DesignOptions& opt) {
    if (dims.n1 < 1 || dims.n2 < 1) throw ConfigError("need at least one unit and one category");
    if (dims.n3 < 2) throw ConfigError("need at least two time steps, got " + std::to_string(dims.n3));
    bases.validate(dims);

    std::shared_ptr<SsrDesign> d(new SsrDesign());
    d->dims_ = dims;
    d->bases_ = bases;
    auto mean = bases.mean();
    for (int k = 0; k < 3; ++k) {
        d->mean_[k] = truncate_basis(mean[k], opt.rank_tol);
        d->mean_proj_[k] = d->mean_[k].projector;
        d->mean_pinv_[k] = d->mean_[k].pinv;
    }
    d->hot_ = bases.hot();
    d->hot_identity_ = true;
    for (int k = 0; k < 3; ++k) {
        d->hot_t_[k] = transpose(d->hot_[k]);
        d->hot_identity_ = d->hot_identity_ && is_identity(d->hot_[k]);
    }

    const Index n3 = dims.n3;
    Mat m = Mat::Zero(n3, n3);
    for (Index t = 0; t + 1 < n3; ++t) {
        m(t, t) = -1.0;
        m(t, t + 1) = 1.0;
    }
    m.row(n3 - 1).setOnes();
    Eigen::FullPivLU<Mat> lu(m);
    if (!lu.isInvertible() || lu.rcond() < 1e-12)
        throw NumericalError("augmented difference operator is singular (rcond " + std::to_string(lu.rcond()) + ")");
    d->m_inv_ = lu.inverse();
    d->m_last_ = d->m_inv_.col(n3 - 1);

    const Index p = d->p();
    Mat x2d(d->n(), p);
    Vec e = Vec::Zero(p);
    for (Index k = 0; k < p; ++k) {
        e[k] = 1.0;
        x2d.col(k) = d->x2(e);
        e[k] = 0.0;
    }
    d->gram_ = x2d.transpose() * x2d;
    Eigen::SelfAdjointEigenSolver<Mat> es(d->gram_, Eigen::EigenvaluesOnly);
    double emax = es.eigenvalues().maxCoeff();
    double emin = es.eigenvalues().minCoeff();
    Mat g = d->gram_;
    if (!(emax > 0.0) || emin <= 1e-10 * emax) {
        double ridge = 1e-10 * std::max(d->gram_.trace(), 1.0);
        g.diagonal().array() += ridge;
        d->ridged_ = true;
        d->warning_ = "X2^T X2 is singular (min eigenvalue " + std::to_string(emin) + ", max " +
                      std::to_string(emax) + "); added ridge " + std::to_string(ridge);
    }
    d->gram_factor_.compute(g);
    if (d->gram_factor_.info() != Eigen::Success) throw NumericalError("failed to factor X2^T X2");

    auto op = [&](const Vec& v) { return Vec(d->xtilde_t(d->xtilde(v))); };
    auto pw = largest_eigenvalue(op, d->n_beta1(), opt.power_max_iter, opt.power_tol);
    d->lipschitz_ = 1.01 * pw.value;
    return d;
}

Vec SsrDesign::project_mean(const Vec& v) const { return apply_modes(v, dims_, mean_proj_); }

Vec SsrDesign::annihilate_mean(const Vec& v) const { return v - project_mean(v); }

Vec SsrDesign::mean_apply(const Vec& theta) const { return apply_modes(theta, dims_, bases_.mean()); }

Vec SsrDesign::mean_pinv(const Vec& v) const { return apply_modes(v, dims_, mean_pinv_); }

Vec SsrDesign::hot_apply(const Vec& theta) const {
    if (hot_identity_) return theta;
    return apply_modes(theta, dims_, hot_);
}

Vec SsrDesign::hot_apply_t(const Vec& u) const {
    if (hot_identity_) return u;
    return apply_modes(u, dims_, hot_t_);
}

Vec SsrDesign::x(const Vec& theta) const { return annihilate_mean(hot_apply(theta)); }

Vec SsrDesign::x_t(const Vec& u) const { return hot_apply_t(annihilate_mean(u)); }

Vec SsrDesign::dtilde_inv(const Vec& beta) const {
    Vec out(n());
    Eigen::Map<Mat>(out.data(), p(), dims_.n3).noalias() =
        Eigen::Map<const Mat>(beta.data(), p(), dims_.n3) * m_inv_.transpose();
    return out;
}

Vec SsrDesign::dtilde_inv_t(const Vec& v) const {
    Vec out(n());
    Eigen::Map<Mat>(out.data(), p(), dims_.n3).noalias() = Eigen::Map<const Mat>(v.data(), p(), dims_.n3) * m_inv_;
    return out;
}

Vec SsrDesign::x1(const Vec& beta1) const {
    const Index n3 = dims_.n3;
    Vec theta(n());
    Eigen::Map<Mat>(theta.data(), p(), n3).noalias() =
        Eigen::Map<const Mat>(beta1.data(), p(), n3 - 1) * m_inv_.leftCols(n3 - 1).transpose();
    return x(theta);
}

Vec SsrDesign::x1_t(const Vec& u) const {
    const Index n3 = dims_.n3;
    Vec v = x_t(u);
    Vec out(n_beta1());
    Eigen::Map<Mat>(out.data(), p(), n3 - 1).noalias() =
        Eigen::Map<const Mat>(v.data(), p(), n3) * m_inv_.leftCols(n3 - 1);
    return out;
}

Vec SsrDesign::x2(const Vec& beta2) const {
    Vec theta(n());
    Eigen::Map<Mat>(theta.data(), p(), dims_.n3).noalias() = beta2 * m_last_.transpose();
    return x(theta);
}

Vec SsrDesign::x2_t(const Vec& u) const {
    Vec v = x_t(u);
    return Eigen::Map<const Mat>(v.data(), p(), dims_.n3) * m_last_;
}

Vec SsrDesign::gram_solve(const Vec& g) const { return gram_factor_.solve(g); }

Vec SsrDesign::project_x2(const Vec& u) const { return x2(gram_solve(x2_t(u))); }

Vec SsrDesign::xtilde(const Vec& beta1) const {
    Vec w = x1(beta1);
    return w - project_x2(w);
}

Vec SsrDesign::xtilde_t(const Vec& u) const { return x1_t(u - project_x2(u)); }

SsrProblem make_problem(DesignPtr design, const Tensor3& y) {
    if (!design) throw ConfigError("make_problem: no design");
    if (!(y.dims() == design->dims())) throw ShapeError("observation tensor dims do not match the design");
    if (!y.data().allFinite()) throw NumericalError("observation tensor has non-finite entries");
    SsrProblem p;
    p.design = std::move(design);
    p.y = y.data();
    p.y_star = compute_y_star(*p.design, p.y);
    return p;
}

Vec solve_theta_m(const SsrProblem& problem, const Vec& theta_h) {
    if (theta_h.size() != problem.y.size())
        throw ShapeError("theta_h length " + std::to_string(theta_h.size()) + " != " + std::to_string(problem.y.size()));
    return problem.design->mean_pinv(problem.y - problem.design->hot_apply(theta_h));
}

Vec compute_y_star(const SsrDesign& design, const Vec& y) {
    if (y.size() != design.n()) throw ShapeError("y length does not match design");
    return design.annihilate_mean(y);
}

SpMat build_difference_operator(Index n1, Index n2, Index n3) {
    if (n3 < 2) throw ConfigError("difference operator needs n3 >= 2, got " + std::to_string(n3));
    const Index p = n1 * n2;
    const Index r = p * (n3 - 1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * r);
    for (Index i = 0; i < r; ++i) {
        trip.emplace_back(i, i, -1.0);
        trip.emplace_back(i, i + p, 1.0);
    }
    SpMat d(r, p * n3);
    d.setFromTriplets(trip.begin(), trip.end());
    return d;
}

Augmentation build_augmentation(Index n1, Index n2, Index n3) {
    SpMat d = build_difference_operator(n1, n2, n3);
    const Index p = n1 * n2;
    const Index n = p * n3;
    std::vector<Eigen::Triplet<double>> ta, tt;
    for (Index k = 0; k < d.outerSize(); ++k)
        for (SpMat::InnerIterator it(d, k); it; ++it) tt.emplace_back(it.row(), it.col(), it.value());
    for (Index r = 0; r < p; ++r)
        for (Index t = 0; t < n3; ++t) {
            ta.emplace_back(r, r + p * t, 1.0);
            tt.emplace_back(d.rows() + r, r + p * t, 1.0);
        }
    Augmentation out;
    out.a.resize(p, n);
    out.a.setFromTriplets(ta.begin(), ta.end());
    out.d_tilde.resize(n, n);
    out.d_tilde.setFromTriplets(tt.begin(), tt.end());
    return out;
}

Vec apply_difference(const Vec& theta, const Dims& d) {
    if (theta.size() != d.size()) throw ShapeError("apply_difference: length mismatch");
    const Index p = d.slice();
    return theta.tail(p * (d.n3 - 1)) - theta.head(p * (d.n3 - 1));
}

namespace {

double dense_lipschitz(const Mat& x) {
    if (x.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(x.transpose() * x, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

DenseLasso::DenseLasso(Mat x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() != y_.size()) throw ShapeError("DenseLasso: X rows != y length");
    lipschitz_ = dense_lipschitz(x_);
}

ReducedLasso::ReducedLasso(const SsrProblem& problem) : design_(problem.design), y_star_(problem.y_star) {
    y_tilde_ = y_star_ - design_->project_x2(y_star_);
}

ReducedLasso::Dense ReducedLasso::materialize() const {
    const SsrDesign& d = *design_;
    Dense out;
    out.x1.resize(d.n(), d.n_beta1());
    out.x2.resize(d.n(), d.p());
    Vec e1 = Vec::Zero(d.n_beta1());
    for (Index k = 0; k < d.n_beta1(); ++k) {
        e1[k] = 1.0;
        out.x1.col(k) = d.x1(e1);
        e1[k] = 0.0;
    }
    Vec e2 = Vec::Zero(d.p());
    Mat ginv_x2t(d.p(), d.n());
    for (Index k = 0; k < d.p(); ++k) {
        e2[k] = 1.0;
        out.x2.col(k) = d.x2(e2);
        e2[k] = 0.0;
    }
    Mat x2t = out.x2.transpose();
    for (Index c = 0; c < d.n(); ++c) ginv_x2t.col(c) = d.gram_solve(x2t.col(c));
    out.p = out.x2 * ginv_x2t;
    out.x_tilde = out.x1 - out.p * out.x1;
    out.y_tilde = y_tilde_;
    return out;
}

ReducedLasso transform_to_lasso(const SsrProblem& problem) { return ReducedLasso(problem); }

double ssr_objective(const SsrProblem& problem, const Vec& theta_h, double lambda1, double lambda2) {
    const SsrDesign& d = *problem.design;
    double fit = 0.5 * (problem.y_star - d.x(theta_h)).squaredNorm();
    return fit + lambda1 * theta_h.lpNorm<1>() + lambda2 * apply_difference(theta_h, d.dims()).lpNorm<1>();
}

double lasso_objective(const LassoProblem& lasso, const Vec& b, double lambda) {
    return 0.5 * (lasso.y() - lasso.apply(b)).squaredNorm() + lambda * b.lpNorm<1>();
}

double eliminated_quadratic(const ReducedLasso& lasso, const Vec& beta1, const Vec& beta2) {
    const SsrDesign& d = lasso.design();
    Vec r = lasso.y_star() - d.x1(beta1);
    return 0.5 * (d.project_x2(r) - d.x2(beta2)).squaredNorm();
}

}  // namespace ssr
