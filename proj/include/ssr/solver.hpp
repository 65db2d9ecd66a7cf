#pragma once

#include "ssr/model.hpp"

#include <utility>
#include <vector>

namespace ssr {

struct FistaConfig {
    int max_iter = 500;
    double tol = 1e-8;
    bool restart = false;   // reset momentum when the objective goes up
    double lipschitz = 0.0;  // 0 means take it from the problem
};

struct FistaResult {
    Vec beta;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> best_history;  // best objective after each iteration
};

double soft_threshold(double v, double t);
Vec soft_threshold(const Vec& v, double t);

// t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
double fista_next_t(double t);

// Minimizes 1/2 ||y - X b||^2 + lambda ||b||_1, starting from b = 0.
FistaResult fista_solve(const LassoProblem& lasso, double lambda, const FistaConfig& cfg = {});

// Least-squares completion beta2 = (X2^T X2)^{-1} X2^T (y* - X1 beta1).
Vec recover_beta2(const ReducedLasso& lasso, const Vec& beta1);

// theta = D-tilde^{-1} [beta1; beta2].
Vec back_transform(const SsrDesign& design, const Vec& beta1, const Vec& beta2);

// Elementwise sign(theta) * max(|theta| - lambda1, 0).
Vec lambda1_path(const Vec& theta_h_0, double lambda1);

struct LambdaGrid {
    std::vector<std::pair<double, double>> pairs;  // (lambda1, lambda2)

    void validate() const;
    std::size_t size() const { return pairs.size(); }
    // Distinct lambda2 values in first-appearance order.
    std::vector<double> lambda2_values() const;
    static LambdaGrid product(const std::vector<double>& lambda1s, const std::vector<double>& lambda2s);
};

struct SsrFit {
    double lambda1 = 0.0, lambda2 = 0.0;
    Vec theta_m, theta_h, mu_hat, h_hat, residual;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

// The lambda1 = 0 solution for one lambda2.
struct Lambda2Solution {
    double lambda2 = 0.0;
    Vec beta1, beta2, theta_h0;
    int iterations = 0;
    bool converged = false;
};

Lambda2Solution solve_lambda2(const SsrProblem& problem, double lambda2, const FistaConfig& cfg = {});
SsrFit finish_fit(const SsrProblem& problem, const Lambda2Solution& sol, double lambda1);
SsrFit fit(const SsrProblem& problem, double lambda1, double lambda2, const FistaConfig& cfg = {});

// One fit per grid pair, in grid order; each distinct lambda2 is solved once.
std::vector<SsrFit> fit_grid(const SsrProblem& problem, const LambdaGrid& grid, const FistaConfig& cfg = {});

}  // namespace ssr
