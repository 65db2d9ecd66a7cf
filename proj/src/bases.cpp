#include "ssr/bases.hpp"

#include "ssr/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ssr {

Mat gaussian_kernel_basis(const KernelConfig& cfg) {
    if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth))
        throw ConfigError("kernel bandwidth must be positive, got " + std::to_string(cfg.bandwidth));
    const Mat& d = cfg.distance;
    if (d.rows() != d.cols() || d.rows() == 0) throw ShapeError("distance matrix must be square and nonempty");
    for (Index i = 0; i < d.rows(); ++i) {
        if (d(i, i) != 0.0) throw ConfigError("distance matrix diagonal entry " + std::to_string(i) + " is not zero");
        for (Index j = 0; j < d.cols(); ++j) {
            if (!std::isfinite(d(i, j)) || d(i, j) < 0.0)
                throw ConfigError("distance matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") must be finite and nonnegative");
            if (std::abs(d(i, j) - d(j, i)) > 1e-12 * (1.0 + std::abs(d(i, j))))
                throw ConfigError("distance matrix is not symmetric at (" + std::to_string(i) + "," +
                                  std::to_string(j) + ")");
        }
    }
    const double s = 2.0 * cfg.bandwidth * cfg.bandwidth;
    return d.unaryExpr([s](double x) { return std::exp(-x * x / s); });
}

ModeMatrix identity_basis(Index n) {
    if (n < 1) throw ConfigError("identity basis needs n >= 1");
    return IdentityMatrix{n};
}

Mat line_distance(Index n) {
    Mat d(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) d(i, j) = std::abs(static_cast<double>(i - j));
    return d;
}

Vec clamped_uniform_knots(int degree, int n_knots) {
    if (degree < 0) throw ConfigError("spline degree must be nonnegative");
    if (n_knots < 2) throw ConfigError("need at least two knots");
    Vec u(n_knots + 2 * degree);
    Index k = 0;
    for (int r = 0; r < degree; ++r) u[k++] = 0.0;
    for (int r = 0; r < n_knots; ++r) u[k++] = static_cast<double>(r) / (n_knots - 1);
    for (int r = 0; r < degree; ++r) u[k++] = 1.0;
    return u;
}

namespace {

// Non-zero basis functions on knot span `span` (triangular de Boor scheme).
std::vector<double> span_basis(const Vec& u, int span, int p, double x) {
    std::vector<double> n(p + 1, 0.0), left(p + 1), right(p + 1);
    n[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - u[span + 1 - j];
        right[j] = u[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            double tmp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        n[j] = saved;
    }
    return n;
}

}  // namespace

Mat bspline_basis(Index n_points, int degree, int n_knots) {
    Vec u = clamped_uniform_knots(degree, n_knots);
    const int q = n_knots + degree - 1;
    if (n_points < q)
        throw ConfigError("bspline_basis: " + std::to_string(n_points) + " points is fewer than the " +
                          std::to_string(q) + " basis functions");
    Mat b = Mat::Zero(n_points, q);
    for (Index i = 0; i < n_points; ++i) {
        double x = n_points == 1 ? 0.0 : static_cast<double>(i) / (n_points - 1);
        int span = q - 1;
        if (x < 1.0) {
            span = degree;
            while (span < q - 1 && x >= u[span + 1]) ++span;
        }
        auto n = span_basis(u, span, degree, x);
        for (int r = 0; r <= degree; ++r) b(i, span - degree + r) = n[r];
    }
    return b;
}

void BasisSet::validate(const Dims& d) const {
    const char* names[6] = {"b_ms", "b_mr", "b_mt", "b_hs", "b_hr", "b_ht"};
    const ModeMatrix* ms[6] = {&b_ms, &b_mr, &b_mt, &b_hs, &b_hr, &b_ht};
    for (int k = 0; k < 6; ++k) {
        Index want = d[k % 3 + 1];
        if (rows(*ms[k]) != want || cols(*ms[k]) != want)
            throw ShapeError(std::string(names[k]) + " is " + std::to_string(rows(*ms[k])) + "x" +
                             std::to_string(cols(*ms[k])) + ", expected " + std::to_string(want) + "x" +
                             std::to_string(want));
        if (auto* m = std::get_if<Mat>(ms[k]); m && !m->allFinite())
            throw NumericalError(std::string(names[k]) + " has non-finite entries");
    }
}

BasisSet BasisSet::standard(const Mat& spatial_kernel, Index n2, Index n3) {
    Index n1 = spatial_kernel.rows();
    return {spatial_kernel, identity_basis(n2), identity_basis(n3),
            identity_basis(n1), identity_basis(n2), identity_basis(n3)};
}

BasisSet BasisSet::identity(const Dims& d) {
    return {identity_basis(d.n1), identity_basis(d.n2), identity_basis(d.n3),
            identity_basis(d.n1), identity_basis(d.n2), identity_basis(d.n3)};
}

TruncatedBasis truncate_basis(const ModeMatrix& b, double rank_tol) {
    if (!(rank_tol >= 1e-10) || !(rank_tol < 1.0))
        throw ConfigError("rank tolerance must lie in [1e-10, 1), got " + std::to_string(rank_tol));
    TruncatedBasis out;
    if (auto* id = std::get_if<IdentityMatrix>(&b)) {
        out.projector = b;
        out.pinv = b;
        out.rank = id->n;
        out.singular_values = Vec::Ones(id->n);
        return out;
    }
    const Mat& m = std::get<Mat>(b);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    double smax = out.singular_values.size() ? out.singular_values[0] : 0.0;
    Index r = 0;
    if (smax > 0.0)
        while (r < out.singular_values.size() && out.singular_values[r] > rank_tol * smax) ++r;
    out.rank = r;
    Mat ur = svd.matrixU().leftCols(r);
    Mat vr = svd.matrixV().leftCols(r);
    out.projector = Mat(ur * ur.transpose());
    out.pinv = Mat(vr * out.singular_values.head(r).cwiseInverse().asDiagonal() * ur.transpose());
    return out;
}

}  // namespace ssr
