#include "ssr/linalg.hpp"

#include <cmath>

namespace ssr {

PowerIterationResult largest_eigenvalue(const std::function<Vec(const Vec&)>& op, Index n, int max_iter, double tol) {
    PowerIterationResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 7.0 * static_cast<double>(i));
    v.normalize();
    double prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vec w = op(v);
        double lam = v.dot(w);
        double nw = w.norm();
        res.iterations = it;
        if (nw == 0.0) {
            res.value = 0.0;
            res.converged = true;
            return res;
        }
        v = w / nw;
        res.value = std::max(lam, nw);
        if (it > 1 && std::abs(res.value - prev) <= tol * res.value) {
            res.converged = true;
            break;
        }
        prev = res.value;
    }
    return res;
}

}  // namespace ssr
