#pragma once

// Straightforward reference implementations used to check the library.
// They deliberately avoid the library's own fast paths.

#include "ssr/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using ssr::Index;
using ssr::Mat;
using ssr::Vec;

inline Mat random_matrix(std::mt19937_64& g, Index r, Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = n(g);
    return m;
}

inline Vec random_vector(std::mt19937_64& g, Index n) { return random_matrix(g, n, 1).col(0); }

inline ssr::Tensor3 random_tensor(std::mt19937_64& g, ssr::Dims d) {
    return ssr::Tensor3(d, random_vector(g, d.size()));
}

// Explicit sum over the contracted index.
inline ssr::Tensor3 mode_product(const ssr::Tensor3& t, const Mat& m, int k) {
    ssr::Dims d = t.dims();
    ssr::Dims od = d;
    if (k == 1) od.n1 = m.rows();
    if (k == 2) od.n2 = m.rows();
    if (k == 3) od.n3 = m.rows();
    ssr::Tensor3 out(od);
    for (Index a = 0; a < od.n1; ++a)
        for (Index b = 0; b < od.n2; ++b)
            for (Index c = 0; c < od.n3; ++c) {
                double s = 0.0;
                for (Index q = 0; q < d[k]; ++q) {
                    Index i = k == 1 ? q : a, j = k == 2 ? q : b, t3 = k == 3 ? q : c;
                    Index row = k == 1 ? a : (k == 2 ? b : c);
                    s += m(row, q) * t(i, j, t3);
                }
                out(a, b, c) = s;
            }
    return out;
}

// Element formula (A (x) B)[i*p + r, j*q + s] = A[i,j] B[r,s].
inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            for (Index r = 0; r < b.rows(); ++r)
                for (Index s = 0; s < b.cols(); ++s) out(i * b.rows() + r, j * b.cols() + s) = a(i, j) * b(r, s);
    return out;
}

// Recursive Cox-de Boor definition; the right end point is assigned to the
// last non-empty span.
inline double cox_de_boor(int i, int p, double x, const std::vector<double>& u) {
    if (p == 0) {
        double lo = u[i], hi = u[i + 1];
        if (lo == hi) return 0.0;
        if (x >= lo && x < hi) return 1.0;
        bool last = hi == u.back() && x == hi;
        if (last) {
            // only the last non-degenerate span owns x = end
            for (std::size_t k = i + 1; k + 1 < u.size(); ++k)
                if (u[k] < u[k + 1]) return 0.0;
            return 1.0;
        }
        return 0.0;
    }
    double a = 0.0, b = 0.0;
    if (u[i + p] != u[i]) a = (x - u[i]) / (u[i + p] - u[i]) * cox_de_boor(i, p - 1, x, u);
    if (u[i + p + 1] != u[i + 1]) b = (u[i + p + 1] - x) / (u[i + p + 1] - u[i + 1]) * cox_de_boor(i + 1, p - 1, x, u);
    return a + b;
}

// Orthogonal projector onto the column space of b (dense pseudo-inverse).
inline Mat projector(const Mat& b) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(b);
    cod.setThreshold(1e-9);
    return b * cod.pseudoInverse();
}

// Low-rank random square matrix n x n of rank r.
inline Mat low_rank(std::mt19937_64& g, Index n, Index r) {
    if (r == 0) return Mat::Zero(n, n);
    return random_matrix(g, n, r) * random_matrix(g, r, n);
}

// Cyclic coordinate descent for 1/2 ||y - X b||^2 + lambda ||b||_1.
inline Vec lasso_cd(const Mat& x, const Vec& y, double lambda, int max_sweeps = 200000, double tol = 1e-15) {
    Vec b = Vec::Zero(x.cols());
    Vec r = y;
    Vec col_sq = x.colwise().squaredNorm();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double delta = 0.0;
        for (Index j = 0; j < x.cols(); ++j) {
            if (col_sq[j] == 0.0) continue;
            double rho = x.col(j).dot(r) + col_sq[j] * b[j];
            double nb = rho > lambda ? (rho - lambda) / col_sq[j] : (rho < -lambda ? (rho + lambda) / col_sq[j] : 0.0);
            double step = nb - b[j];
            if (step != 0.0) {
                r -= step * x.col(j);
                delta = std::max(delta, std::abs(step));
                b[j] = nb;
            }
        }
        if (delta < tol) break;
    }
    return b;
}

// min 1/2 ||y - X theta||^2 + sum_r w_r |(F theta)_r| by accelerated
// proximal gradient.  The prox of the penalty is evaluated through its dual
// (box-constrained least squares), solved by projected gradient with warm
// starts.
struct GeneralizedLassoOracle {
    Mat x, f;
    Vec y, w;

    double objective(const Vec& th) const {
        return 0.5 * (y - x * th).squaredNorm() + (w.array() * (f * th).array().abs()).sum();
    }

    Vec solve(int outer = 20000, int inner = 2000, double tol = 1e-13) const {
        const Index n = x.cols();
        Eigen::SelfAdjointEigenSolver<Mat> es(x.transpose() * x, Eigen::EigenvaluesOnly);
        double lip = std::max(es.eigenvalues().maxCoeff(), 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat> fs(f * f.transpose(), Eigen::EigenvaluesOnly);
        double lf = std::max(fs.eigenvalues().maxCoeff(), 1e-12);
        Vec th = Vec::Zero(n), prev = th, z = th;
        Vec u = Vec::Zero(f.rows());
        double t = 1.0, obj_prev = objective(th);
        for (int k = 0; k < outer; ++k) {
            Vec v = z - x.transpose() * (x * z - y) / lip;
            Vec bound = w / lip;
            for (int it = 0; it < inner; ++it) {
                Vec un = u - f * (f.transpose() * u - v) / lf;
                un = un.cwiseMax(-bound).cwiseMin(bound);
                double ch = (un - u).lpNorm<Eigen::Infinity>();
                u = un;
                if (ch < 1e-15) break;
            }
            th = v - f.transpose() * u;
            double tn = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
            z = th + (t - 1) / tn * (th - prev);
            t = tn;
            prev = th;
            double obj = objective(th);
            if (k > 50 && std::abs(obj - obj_prev) < tol * std::max(1.0, obj)) break;
            obj_prev = obj;
        }
        return th;
    }
};

}  // namespace oracle
