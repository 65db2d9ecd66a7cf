#include "ssr/tensor.hpp"

#include "ssr/errors.hpp"

#include <string>

namespace ssr {

namespace {

void check_mode(int k) {
    if (k < 1 || k > 3) throw ShapeError("mode index must be 1, 2 or 3, got " + std::to_string(k));
}

Dims with_mode(Dims d, int k, Index n) {
    if (k == 1) d.n1 = n;
    else if (k == 2) d.n2 = n;
    else d.n3 = n;
    return d;
}

}  // namespace

Tensor3::Tensor3(Dims d) : dims_(d), data_(Vec::Zero(d.size())) {
    if (d.n1 < 0 || d.n2 < 0 || d.n3 < 0) throw ShapeError("negative tensor dimension");
}

Tensor3::Tensor3(Dims d, Vec data) : dims_(d), data_(std::move(data)) {
    if (data_.size() != d.size())
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match dims " +
                         std::to_string(d.n1) + "x" + std::to_string(d.n2) + "x" + std::to_string(d.n3));
}

Index rows(const ModeMatrix& m) {
    if (auto* id = std::get_if<IdentityMatrix>(&m)) return id->n;
    return std::get<Mat>(m).rows();
}

Index cols(const ModeMatrix& m) {
    if (auto* id = std::get_if<IdentityMatrix>(&m)) return id->n;
    return std::get<Mat>(m).cols();
}

bool is_identity(const ModeMatrix& m) { return std::holds_alternative<IdentityMatrix>(m); }

Mat to_dense(const ModeMatrix& m) {
    if (auto* id = std::get_if<IdentityMatrix>(&m)) return Mat::Identity(id->n, id->n);
    return std::get<Mat>(m);
}

ModeMatrix transpose(const ModeMatrix& m) {
    if (is_identity(m)) return m;
    return Mat(std::get<Mat>(m).transpose());
}

Vec vec(const Tensor3& t) { return t.data(); }

Tensor3 unvec(const Vec& v, Dims d) {
    if (v.size() != d.size())
        throw ShapeError("unvec: vector length " + std::to_string(v.size()) + " != " + std::to_string(d.size()));
    return Tensor3(d, v);
}

Mat unfold(const Tensor3& t, int k) {
    check_mode(k);
    const Dims& d = t.dims();
    const double* p = t.data().data();
    if (k == 1) return Eigen::Map<const Mat>(p, d.n1, d.n2 * d.n3);
    if (k == 3) return Eigen::Map<const Mat>(p, d.n1 * d.n2, d.n3).transpose();
    Mat out(d.n2, d.n1 * d.n3);
    for (Index s = 0; s < d.n3; ++s) out.middleCols(s * d.n1, d.n1) = t.slice(s).transpose();
    return out;
}

Tensor3 fold(const Mat& m, int k, Dims d) {
    check_mode(k);
    Index other = d.size() / std::max<Index>(d[k], 1);
    if (m.rows() != d[k] || m.cols() != other)
        throw ShapeError("fold: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " but mode " + std::to_string(k) + " needs " + std::to_string(d[k]) + "x" +
                         std::to_string(other));
    Tensor3 t(d);
    double* p = t.data().data();
    if (k == 1) {
        Eigen::Map<Mat>(p, d.n1, d.n2 * d.n3) = m;
    } else if (k == 3) {
        Eigen::Map<Mat>(p, d.n1 * d.n2, d.n3) = m.transpose();
    } else {
        for (Index s = 0; s < d.n3; ++s)
            Eigen::Map<Mat>(p + s * d.slice(), d.n1, d.n2) = m.middleCols(s * d.n1, d.n1).transpose();
    }
    return t;
}

Tensor3 mode_product(const Tensor3& t, const Mat& m, int k) {
    check_mode(k);
    const Dims& d = t.dims();
    if (m.cols() != d[k])
        throw ShapeError("mode_product: mode " + std::to_string(k) + " has size " + std::to_string(d[k]) +
                         " but matrix has " + std::to_string(m.cols()) + " columns");
    Dims od = with_mode(d, k, m.rows());
    Tensor3 out(od);
    const double* p = t.data().data();
    double* q = out.data().data();
    if (k == 1) {
        Eigen::Map<Mat>(q, od.n1, od.n2 * od.n3).noalias() = m * Eigen::Map<const Mat>(p, d.n1, d.n2 * d.n3);
    } else if (k == 3) {
        Eigen::Map<Mat>(q, od.slice(), od.n3).noalias() = Eigen::Map<const Mat>(p, d.slice(), d.n3) * m.transpose();
    } else {
        for (Index s = 0; s < d.n3; ++s)
            Eigen::Map<Mat>(q + s * od.slice(), od.n1, od.n2).noalias() = t.slice(s) * m.transpose();
    }
    return out;
}

Tensor3 mode_product(const Tensor3& t, const ModeMatrix& m, int k) {
    check_mode(k);
    if (auto* id = std::get_if<IdentityMatrix>(&m)) {
        if (id->n != t.dims()[k])
            throw ShapeError("mode_product: mode " + std::to_string(k) + " has size " +
                             std::to_string(t.dims()[k]) + " but identity has size " + std::to_string(id->n));
        return t;
    }
    return mode_product(t, std::get<Mat>(m), k);
}

Tensor3 multi_mode_product(const Tensor3& t, const std::array<ModeMatrix, 3>& ms) {
    Tensor3 out = mode_product(t, ms[0], 1);
    out = mode_product(out, ms[1], 2);
    return mode_product(out, ms[2], 3);
}

Vec apply_modes(const Vec& v, Dims d, const std::array<ModeMatrix, 3>& ms) {
    return multi_mode_product(unvec(v, d), ms).data();
}

Mat kronecker(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat kron_chain(const Mat& a, const Mat& b, const Mat& c) { return kronecker(kronecker(c, b), a); }

}  // namespace ssr
