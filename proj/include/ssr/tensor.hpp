#pragma once

#include <Eigen/Dense>

#include <array>
#include <variant>

namespace ssr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// n1 = spatial units, n2 = categories, n3 = time steps.
struct Dims {
    Index n1 = 0, n2 = 0, n3 = 0;

    Index operator[](int k) const { return k == 1 ? n1 : (k == 2 ? n2 : n3); }
    Index size() const { return n1 * n2 * n3; }
    Index slice() const { return n1 * n2; }
    bool operator==(const Dims&) const = default;
};

// Flat index of (i, j, t), zero-based: the state index runs fastest, then
// category, then time.  flat = i + n1*(j + n2*t).
inline Index flat_index(const Dims& d, Index i, Index j, Index t) {
    return i + d.n1 * (j + d.n2 * t);
}

class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(Dims d);
    Tensor3(Dims d, Vec data);

    static Tensor3 zeros(Dims d) { return Tensor3(d); }

    const Dims& dims() const { return dims_; }
    const Vec& data() const { return data_; }
    Vec& data() { return data_; }

    double& operator()(Index i, Index j, Index t) { return data_[flat_index(dims_, i, j, t)]; }
    double operator()(Index i, Index j, Index t) const { return data_[flat_index(dims_, i, j, t)]; }

    // Column-major n1 x n2 view of time slice t.
    Eigen::Map<const Mat> slice(Index t) const {
        return {data_.data() + t * dims_.slice(), dims_.n1, dims_.n2};
    }

    bool operator==(const Tensor3& o) const { return dims_ == o.dims_ && data_ == o.data_; }

private:
    Dims dims_;
    Vec data_;
};

struct IdentityMatrix {
    Index n = 0;
};

// A per-mode basis or operator.  The identity case is kept symbolic so
// mode products with it are free.
using ModeMatrix = std::variant<IdentityMatrix, Mat>;

Index rows(const ModeMatrix& m);
Index cols(const ModeMatrix& m);
bool is_identity(const ModeMatrix& m);
Mat to_dense(const ModeMatrix& m);
ModeMatrix transpose(const ModeMatrix& m);

Vec vec(const Tensor3& t);
Tensor3 unvec(const Vec& v, Dims d);

Mat unfold(const Tensor3& t, int k);
Tensor3 fold(const Mat& m, int k, Dims d);

Tensor3 mode_product(const Tensor3& t, const Mat& m, int k);
Tensor3 mode_product(const Tensor3& t, const ModeMatrix& m, int k);

// Applies a matrix to each mode in turn: T x1 A x2 B x3 C.
Tensor3 multi_mode_product(const Tensor3& t, const std::array<ModeMatrix, 3>& ms);

// Same as multi_mode_product but on a flat vector laid out as vec(T).
Vec apply_modes(const Vec& v, Dims d, const std::array<ModeMatrix, 3>& ms);

Mat kronecker(const Mat& a, const Mat& b);

// Kronecker chain consistent with the linearization above:
// vec(T x1 A x2 B x3 C) == kron_chain(A, B, C) * vec(T) == (C (x) B (x) A) vec(T).
Mat kron_chain(const Mat& a, const Mat& b, const Mat& c);

}  // namespace ssr
