#pragma once

#include "ssr/tensor.hpp"

#include <functional>

namespace ssr {

struct PowerIterationResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Largest eigenvalue of a symmetric positive semidefinite operator.
// The start vector is fixed so results are reproducible.
PowerIterationResult largest_eigenvalue(const std::function<Vec(const Vec&)>& op, Index n, int max_iter = 200,
                                        double tol = 1e-6);

}  // namespace ssr
