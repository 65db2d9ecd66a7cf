#pragma once

// Small random problems shared by the unit and acceptance tests.

#include "oracles.hpp"
#include "ssr/model.hpp"

namespace fixture {

using ssr::Dims;
using ssr::Mat;

// Mean bases are dense random matrices; with rank_deficient each mode loses
// one rank (down to at least one).  Hot-spot bases are identity.
inline ssr::BasisSet random_bases(std::mt19937_64& g, const Dims& d, bool rank_deficient) {
    auto one = [&](ssr::Index n) -> ssr::ModeMatrix {
        if (!rank_deficient) return oracle::random_matrix(g, n, n);
        return oracle::low_rank(g, n, std::max<ssr::Index>(1, n - 1));
    };
    ssr::BasisSet b;
    b.b_ms = one(d.n1);
    b.b_mr = one(d.n2);
    b.b_mt = one(d.n3);
    b.b_hs = ssr::IdentityMatrix{d.n1};
    b.b_hr = ssr::IdentityMatrix{d.n2};
    b.b_ht = ssr::IdentityMatrix{d.n3};
    return b;
}

// Dense H_m built from the per-mode pseudo-inverse projectors.
inline Mat dense_mean_projector(const ssr::BasisSet& b) {
    using ssr::to_dense;
    return oracle::kron(oracle::kron(oracle::projector(to_dense(b.b_mt)), oracle::projector(to_dense(b.b_mr))),
                        oracle::projector(to_dense(b.b_ms)));
}

inline Mat dense_mean_basis(const ssr::BasisSet& b) {
    using ssr::to_dense;
    return oracle::kron(oracle::kron(to_dense(b.b_mt), to_dense(b.b_mr)), to_dense(b.b_ms));
}

}  // namespace fixture
