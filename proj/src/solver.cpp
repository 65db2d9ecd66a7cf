#include "ssr/solver.hpp"

#include "ssr/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ssr {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

Vec soft_threshold(const Vec& v, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be nonnegative");
    return v.unaryExpr([t](double x) { return soft_threshold(x, t); });
}

double fista_next_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

FistaResult fista_solve(const LassoProblem& lasso, double lambda, const FistaConfig& cfg) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and nonnegative");
    if (cfg.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");

    const Index n = lasso.cols();
    const Vec& y = lasso.y();
    FistaResult res;
    res.beta = Vec::Zero(n);
    res.objective = 0.5 * y.squaredNorm();

    double lip = cfg.lipschitz > 0.0 ? cfg.lipschitz : lasso.lipschitz();
    if (!(lip > 0.0)) {
        // X is zero: the quadratic is constant and b = 0 is optimal.
        res.converged = true;
        return res;
    }
    const double step = 1.0 / lip;

    Vec beta_prev = Vec::Zero(n);
    Vec r_prev = -y;  // X b - y at b = beta_prev
    Vec alpha = beta_prev;
    Vec r_alpha = r_prev;
    double t = 1.0;
    double obj_prev = res.objective;

    for (int k = 1; k <= cfg.max_iter; ++k) {
        Vec g = lasso.apply_t(r_alpha);
        Vec beta = soft_threshold(alpha - step * g, lambda * step);
        Vec r = lasso.apply(beta) - y;
        double obj = 0.5 * r.squaredNorm() + lambda * beta.lpNorm<1>();
        if (!std::isfinite(obj))
            throw DivergenceError("FISTA produced a non-finite objective at iteration " + std::to_string(k));
        res.iterations = k;
        if (obj < res.objective) {
            res.objective = obj;
            res.beta = beta;
        }
        res.best_history.push_back(res.objective);

        double change = std::abs(obj - obj_prev);
        if (change <= cfg.tol * std::max(std::abs(obj_prev), std::numeric_limits<double>::min())) {
            res.converged = true;
            break;
        }

        if (cfg.restart && obj > obj_prev) {
            t = 1.0;
            alpha = beta;
            r_alpha = r;
        } else {
            double t_next = fista_next_t(t);
            double c = (t - 1.0) / t_next;
            alpha = beta + c * (beta - beta_prev);
            r_alpha = r + c * (r - r_prev);
            t = t_next;
        }
        beta_prev = std::move(beta);
        r_prev = std::move(r);
        obj_prev = obj;
    }
    return res;
}

Vec recover_beta2(const ReducedLasso& lasso, const Vec& beta1) {
    const SsrDesign& d = lasso.design();
    if (beta1.size() != d.n_beta1()) throw ShapeError("recover_beta2: beta1 has the wrong length");
    return d.gram_solve(d.x2_t(lasso.y_star() - d.x1(beta1)));
}

Vec back_transform(const SsrDesign& design, const Vec& beta1, const Vec& beta2) {
    Vec beta(design.n());
    beta << beta1, beta2;
    return design.dtilde_inv(beta);
}

Vec lambda1_path(const Vec& theta_h_0, double lambda1) {
    if (!(lambda1 >= 0.0)) throw ConfigError("lambda1 must be nonnegative");
    return soft_threshold(theta_h_0, lambda1);
}

void LambdaGrid::validate() const {
    if (pairs.empty()) throw ConfigError("lambda grid is empty");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [a, b] = pairs[i];
        if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw ConfigError("lambda grid pair " + std::to_string(i) + " has a negative or non-finite entry");
    }
}

std::vector<double> LambdaGrid::lambda2_values() const {
    std::vector<double> out;
    for (auto& pr : pairs) {
        bool seen = false;
        for (double v : out) seen = seen || v == pr.second;
        if (!seen) out.push_back(pr.second);
    }
    return out;
}

LambdaGrid LambdaGrid::product(const std::vector<double>& lambda1s, const std::vector<double>& lambda2s) {
    LambdaGrid g;
    for (double b : lambda2s)
        for (double a : lambda1s) g.pairs.emplace_back(a, b);
    return g;
}

Lambda2Solution solve_lambda2(const SsrProblem& problem, double lambda2, const FistaConfig& cfg) {
    ReducedLasso lasso = transform_to_lasso(problem);
    FistaResult fr = fista_solve(lasso, lambda2, cfg);
    Lambda2Solution sol;
    sol.lambda2 = lambda2;
    sol.beta1 = std::move(fr.beta);
    sol.beta2 = recover_beta2(lasso, sol.beta1);
    sol.theta_h0 = back_transform(*problem.design, sol.beta1, sol.beta2);
    sol.iterations = fr.iterations;
    sol.converged = fr.converged;
    return sol;
}

SsrFit finish_fit(const SsrProblem& problem, const Lambda2Solution& sol, double lambda1) {
    const SsrDesign& d = *problem.design;
    SsrFit f;
    f.lambda1 = lambda1;
    f.lambda2 = sol.lambda2;
    f.theta_h = lambda1_path(sol.theta_h0, lambda1);
    f.theta_m = solve_theta_m(problem, f.theta_h);
    f.mu_hat = d.mean_apply(f.theta_m);
    f.h_hat = d.hot_apply(f.theta_h);
    f.residual = problem.y - f.mu_hat - f.h_hat;
    f.objective = ssr_objective(problem, f.theta_h, lambda1, sol.lambda2);
    f.iterations = sol.iterations;
    f.converged = sol.converged;
    return f;
}

SsrFit fit(const SsrProblem& problem, double lambda1, double lambda2, const FistaConfig& cfg) {
    return finish_fit(problem, solve_lambda2(problem, lambda2, cfg), lambda1);
}

std::vector<SsrFit> fit_grid(const SsrProblem& problem, const LambdaGrid& grid, const FistaConfig& cfg) {
    grid.validate();
    std::vector<Lambda2Solution> sols;
    for (double l2 : grid.lambda2_values()) sols.push_back(solve_lambda2(problem, l2, cfg));
    std::vector<SsrFit> out;
    out.reserve(grid.size());
    for (auto& [l1, l2] : grid.pairs)
        for (auto& s : sols)
            if (s.lambda2 == l2) {
                out.push_back(finish_fit(problem, s, l1));
                break;
            }
    return out;
}

}  // namespace ssr
