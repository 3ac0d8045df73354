/*
 * rng.hpp
 *
 * Deterministic random instance helpers.  Every experiment derives one
 * generator per instance from (base seed, stream index), so reruns with
 * the same configuration reproduce reports bit for bit.
 */
#pragma once

#include "cstar/algebra.hpp"
#include "cstar/spectral.hpp"

#include <cstdint>
#include <random>

namespace cstar {

using Rng = std::mt19937_64;

inline Rng seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{seed, stream, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    return Rng(seq);
}

inline Mat random_ginibre(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cxd(g(rng), g(rng));
    return m;
}

inline Mat random_hermitian_block(Rng& rng, int d) {
    const Mat g = random_ginibre(rng, d, d);
    return 0.5 * (g + g.adjoint());
}

// Self-adjoint element with operator norm exactly `norm` (unless it comes
// out zero, which for continuous distributions does not happen).
inline Element random_hermitian(Rng& rng, const BlockAlgebra& alg, double norm = 1.0) {
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(alg.blocks()));
    for (int b = 0; b < alg.blocks(); ++b) bl.push_back(random_hermitian_block(rng, alg.dim(b)));
    Element h(alg, std::move(bl));
    const double n = operator_norm(h);
    if (n > 0.0 && norm > 0.0) h = cxd(norm / n, 0.0) * h;
    h.certify_self_adjoint();
    return h;
}

// Generic (non-normal) element, one Ginibre block per summand.
inline Element random_ginibre_element(Rng& rng, const BlockAlgebra& alg) {
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(alg.blocks()));
    for (int b = 0; b < alg.blocks(); ++b) bl.push_back(random_ginibre(rng, alg.dim(b), alg.dim(b)));
    return Element(alg, std::move(bl));
}

// Haar-ish unitary: QR of a Ginibre matrix with the R-diagonal phases
// absorbed into Q.
inline Mat random_unitary_block(Rng& rng, int d) {
    const Mat g = random_ginibre(rng, d, d);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        const cxd rii = r(i, i);
        if (std::abs(rii) > 0.0) q.col(i) *= rii / std::abs(rii);
    }
    return q;
}

inline Element random_unitary(Rng& rng, const BlockAlgebra& alg) {
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(alg.blocks()));
    for (int b = 0; b < alg.blocks(); ++b) bl.push_back(random_unitary_block(rng, alg.dim(b)));
    Element u(alg, std::move(bl));
    u.certify_unitary();
    return u;
}

// Rank-prescribed projection: conjugate a diagonal 0/1 pattern by a random
// unitary.
inline Element random_projection(Rng& rng, const BlockAlgebra& alg, const std::vector<int>& ranks) {
    if (static_cast<int>(ranks.size()) != alg.blocks())
        throw std::invalid_argument("random_projection: one rank per block required");
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(alg.blocks()));
    for (int b = 0; b < alg.blocks(); ++b) {
        const int d = alg.dim(b);
        const int r = ranks[static_cast<size_t>(b)];
        if (r < 0 || r > d) throw std::invalid_argument("random_projection: rank out of range");
        const Mat u = random_unitary_block(rng, d);
        Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(d);
        for (int i = 0; i < r; ++i) diag(i) = 1.0;
        bl.push_back(u * diag.asDiagonal() * u.adjoint());
    }
    Element p(alg, std::move(bl));
    p.certify_projection();
    return p;
}

}  // namespace cstar
