#pragma once

#include "ssr/bases.hpp"
#include "ssr/tensor.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <memory>
#include <string>

namespace ssr {

using SpMat = Eigen::SparseMatrix<double>;

struct DesignOptions {
    // Relative singular-value cutoff applied to every mean basis.
    double rank_tol = 1e-10;
    // Power-iteration settings for the Lipschitz constant of the reduced design.
    int power_max_iter = 200;
    double power_tol = 1e-6;
};

// Everything that depends on the bases and dimensions but not on the data.
// Immutable once built; shared between fits, grid pairs and replications.
class SsrDesign {
public:
    static std::shared_ptr<const SsrDesign> build(const Dims& dims, const BasisSet& bases, const DesignOptions& opt = {});

    const Dims& dims() const { return dims_; }
    const BasisSet& bases() const { return bases_; }
    const TruncatedBasis& mean_basis(int k) const { return mean_[k - 1]; }
    Index p() const { return dims_.slice(); }
    Index n() const { return dims_.size(); }
    Index n_beta1() const { return p() * (dims_.n3 - 1); }

    // H_m v and (I - H_m) v.
    Vec project_mean(const Vec& v) const;
    Vec annihilate_mean(const Vec& v) const;
    // B_m theta and B_m^+ v.
    Vec mean_apply(const Vec& theta) const;
    Vec mean_pinv(const Vec& v) const;
    // B_h theta and B_h^T u.
    Vec hot_apply(const Vec& theta) const;
    Vec hot_apply_t(const Vec& u) const;

    // X = (I - H_m) B_h.
    Vec x(const Vec& theta) const;
    Vec x_t(const Vec& u) const;

    // D-tilde^{-1} and its transpose, applied through the n3 x n3 factor.
    Vec dtilde_inv(const Vec& beta) const;
    Vec dtilde_inv_t(const Vec& v) const;
    const Mat& time_factor_inv() const { return m_inv_; }

    // Column blocks of X D-tilde^{-1}.
    Vec x1(const Vec& beta1) const;
    Vec x1_t(const Vec& u) const;
    Vec x2(const Vec& beta2) const;
    Vec x2_t(const Vec& u) const;

    // (X2^T X2)^{-1} g, possibly ridged.
    Vec gram_solve(const Vec& g) const;
    // P u = X2 (X2^T X2)^{-1} X2^T u.
    Vec project_x2(const Vec& u) const;

    // X-tilde = (I - P) X1 and its adjoint.
    Vec xtilde(const Vec& beta1) const;
    Vec xtilde_t(const Vec& u) const;

    // Largest eigenvalue of X-tilde^T X-tilde.
    double lipschitz() const { return lipschitz_; }
    bool gram_ridged() const { return ridged_; }
    const std::string& warning() const { return warning_; }
    const Mat& gram() const { return gram_; }

private:
    SsrDesign() = default;

    Dims dims_;
    BasisSet bases_;
    std::array<TruncatedBasis, 3> mean_;
    std::array<ModeMatrix, 3> mean_proj_, mean_pinv_, hot_, hot_t_;
    bool hot_identity_ = false;
    Mat m_inv_;
    Vec m_last_;
    Mat gram_;
    Eigen::LDLT<Mat> gram_factor_;
    bool ridged_ = false;
    std::string warning_;
    double lipschitz_ = 0.0;
};

using DesignPtr = std::shared_ptr<const SsrDesign>;

struct SsrProblem {
    DesignPtr design;
    Vec y;
    Vec y_star;
};

SsrProblem make_problem(DesignPtr design, const Tensor3& y);

// Closed-form mean coefficients given theta_h: B_m^+ (y - B_h theta_h).
Vec solve_theta_m(const SsrProblem& problem, const Vec& theta_h);

// (I - H_m) y through per-mode projectors.
Vec compute_y_star(const SsrDesign& design, const Vec& y);
inline Vec compute_y_star(const SsrProblem& problem) { return compute_y_star(*problem.design, problem.y); }

// Row r: -1 at column r, +1 at column r + n1*n2.
SpMat build_difference_operator(Index n1, Index n2, Index n3);

struct Augmentation {
    SpMat a;        // n1n2 x n1n2n3, [I I ... I]
    SpMat d_tilde;  // [D; A]
};
Augmentation build_augmentation(Index n1, Index n2, Index n3);

// D theta: stacked slice differences theta_{t+1} - theta_t.
Vec apply_difference(const Vec& theta, const Dims& d);

// Least-squares problem min 1/2 ||y - X b||^2 + lambda ||b||_1 accessed
// only through matrix-vector products.
class LassoProblem {
public:
    virtual ~LassoProblem() = default;
    virtual Index rows() const = 0;
    virtual Index cols() const = 0;
    virtual Vec apply(const Vec& b) const = 0;
    virtual Vec apply_t(const Vec& u) const = 0;
    virtual const Vec& y() const = 0;
    virtual double lipschitz() const = 0;
};

class DenseLasso : public LassoProblem {
public:
    DenseLasso(Mat x, Vec y);
    Index rows() const override { return x_.rows(); }
    Index cols() const override { return x_.cols(); }
    Vec apply(const Vec& b) const override { return x_ * b; }
    Vec apply_t(const Vec& u) const override { return x_.transpose() * u; }
    const Vec& y() const override { return y_; }
    double lipschitz() const override { return lipschitz_; }
    const Mat& x() const { return x_; }

private:
    Mat x_;
    Vec y_;
    double lipschitz_;
};

// Reduced problem in beta1 after eliminating beta2:
// y-tilde = (I - P) y*, X-tilde = (I - P) X1.
class ReducedLasso : public LassoProblem {
public:
    explicit ReducedLasso(const SsrProblem& problem);
    Index rows() const override { return design_->n(); }
    Index cols() const override { return design_->n_beta1(); }
    Vec apply(const Vec& b) const override { return design_->xtilde(b); }
    Vec apply_t(const Vec& u) const override { return design_->xtilde_t(u); }
    const Vec& y() const override { return y_tilde_; }
    double lipschitz() const override { return design_->lipschitz(); }

    const SsrDesign& design() const { return *design_; }
    const Vec& y_star() const { return y_star_; }

    struct Dense {
        Mat x1, x2, p, x_tilde;
        Vec y_tilde;
    };
    // Materialized blocks; only sensible for small problems.
    Dense materialize() const;

private:
    DesignPtr design_;
    Vec y_star_;
    Vec y_tilde_;
};

ReducedLasso transform_to_lasso(const SsrProblem& problem);

// 1/2 ||y* - X theta||^2 + lambda1 ||theta||_1 + lambda2 ||D theta||_1.
double ssr_objective(const SsrProblem& problem, const Vec& theta_h, double lambda1, double lambda2);
// 1/2 ||y - X b||^2 + lambda ||b||_1.
double lasso_objective(const LassoProblem& lasso, const Vec& b, double lambda);
// 1/2 ||P (y* - X1 beta1) - X2 beta2||^2, the part removed by the reduction.
double eliminated_quadratic(const ReducedLasso& lasso, const Vec& beta1, const Vec& beta2);

}  // namespace ssr
