#pragma once

#include "ssr/tensor.hpp"

#include <array>

namespace ssr {

struct KernelConfig {
    double bandwidth = 1.0;
    Mat distance;  // n1 x n1, symmetric, zero diagonal
};

// Entry (i, j) = exp(-d(i,j)^2 / (2 c^2)).
Mat gaussian_kernel_basis(const KernelConfig& cfg);

ModeMatrix identity_basis(Index n);

// Distance |i - j| between positions on a line; used by the simulation.
Mat line_distance(Index n);

// Clamped uniform knot vector on [0,1] with n_knots distinct knots
// (first and last repeated degree+1 times).
Vec clamped_uniform_knots(int degree, int n_knots);

// n_points x q matrix, q = n_knots + degree - 1, rows evaluated at
// i/(n_points-1).
Mat bspline_basis(Index n_points, int degree = 3, int n_knots = 10);

struct BasisSet {
    ModeMatrix b_ms, b_mr, b_mt;
    ModeMatrix b_hs, b_hr, b_ht;

    std::array<ModeMatrix, 3> mean() const { return {b_ms, b_mr, b_mt}; }
    std::array<ModeMatrix, 3> hot() const { return {b_hs, b_hr, b_ht}; }

    // Checks every matrix is square with the size of its mode.
    void validate(const Dims& d) const;

    // Kernel spatial mean basis, everything else identity.
    static BasisSet standard(const Mat& spatial_kernel, Index n2, Index n3);
    static BasisSet identity(const Dims& d);
};

// Rank-truncated view of one basis matrix B: singular directions below
// rank_tol * sigma_max are discarded.  projector = U_r U_r^T, pinv = B^+.
struct TruncatedBasis {
    ModeMatrix projector;
    ModeMatrix pinv;
    Index rank = 0;
    Vec singular_values;
};

TruncatedBasis truncate_basis(const ModeMatrix& b, double rank_tol);

}  // namespace ssr
