/*
 * spectral.hpp
 *
 * Spectral primitives on block algebra elements: Hermitian
 * eigendecomposition, spectral projections onto half-open windows,
 * resolvent contour quadrature (Riesz projections), the unitary polar
 * factor, and the principal logarithm of a unitary.
 */
#pragma once

#include "cstar/algebra.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cstar {

// Eigendecomposition of a self-adjoint element.  Per block: ascending
// eigenvalues and a unitary matrix of eigenvectors (columns).
struct SpectralData {
    BlockAlgebra alg;
    std::vector<Eigen::VectorXd> eigenvalues;
    std::vector<Mat> eigenvectors;

    [[nodiscard]] double min_eigenvalue() const {
        double m = eigenvalues.front().minCoeff();
        for (const auto& ev : eigenvalues) m = std::min(m, ev.minCoeff());
        return m;
    }
    [[nodiscard]] double max_eigenvalue() const {
        double m = eigenvalues.front().maxCoeff();
        for (const auto& ev : eigenvalues) m = std::max(m, ev.maxCoeff());
        return m;
    }

    // V diag(f(lambda)) V* applied blockwise.
    template <class F>
    [[nodiscard]] Element apply(F&& f) const {
        std::vector<Mat> bl;
        bl.reserve(eigenvectors.size());
        for (size_t b = 0; b < eigenvectors.size(); ++b) {
            const auto& V = eigenvectors[b];
            Eigen::VectorXcd fv(eigenvalues[b].size());
            for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(eigenvalues[b](i));
            bl.push_back(V * fv.asDiagonal() * V.adjoint());
        }
        return Element(alg, std::move(bl));
    }
};

inline SpectralData eig_hermitian(const Element& h, double sa_tol = kFlagTol) {
    if (h.self_adjoint_defect() > sa_tol)
        throw std::invalid_argument("eig_hermitian: input is not self-adjoint within tolerance");
    SpectralData sd;
    sd.alg = h.algebra();
    sd.eigenvalues.reserve(static_cast<size_t>(h.blocks()));
    sd.eigenvectors.reserve(static_cast<size_t>(h.blocks()));
    for (int b = 0; b < h.blocks(); ++b) {
        const Mat sym = 0.5 * (h.block(b) + h.block(b).adjoint());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eig_hermitian: eigensolver failed on block " +
                                     std::to_string(b));
        sd.eigenvalues.push_back(es.eigenvalues());
        sd.eigenvectors.push_back(es.eigenvectors());
        // Reconstruction sanity: V diag V* must reproduce the block.
        const double rec =
            (es.eigenvectors() * es.eigenvalues().asDiagonal() *
                 es.eigenvectors().adjoint() - sym).norm();
        if (rec > 1e-10 * std::max(1.0, sym.norm()))
            throw std::runtime_error("eig_hermitian: reconstruction defect too large");
    }
    return sd;
}

// Spectral projection onto the half-open window [lo, hi).
inline Element spectral_projection(const SpectralData& sd, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("spectral_projection: requires lo < hi");
    Element p = sd.apply([lo, hi](double l) { return (l >= lo && l < hi) ? 1.0 : 0.0; });
    p.certify_projection(1e-12);
    return p;
}

struct RieszResult {
    Element projection;
    // Rigorous bound on the quadrature error (geometric tail of the
    // trapezoid rule for the resolvent integrand), reported alongside.
    double error_estimate = 0.0;
    int nodes = 0;
};

// Riesz projection via trapezoid quadrature of (2*pi*i)^{-1} times the
// resolvent integral over the circle |z - center| = radius.  The circle
// must stay clear of the spectrum: every eigenvalue has to be at least
// `margin` away from the contour, otherwise the quadrature is meaningless
// and we refuse to run.  For the trapezoid rule on this analytic
// integrand the error decays like q^N with q = min(|l-c|, r)/max(|l-c|, r)
// per eigenvalue l, which is what error_estimate accumulates.
inline RieszResult riesz_projection(const Element& h, double center, double radius,
                                    int nodes = 64, double margin = 0.0) {
    if (radius <= 0) throw std::invalid_argument("riesz_projection: radius must be positive");
    if (nodes < 8) throw std::invalid_argument("riesz_projection: need at least 8 nodes");
    const SpectralData sd = eig_hermitian(h);

    double min_dist = std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (const auto& ev : sd.eigenvalues)
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            const double a = std::abs(ev(i) - center);
            min_dist = std::min(min_dist, std::abs(a - radius));
            const double q = a < radius ? a / radius : radius / a;
            // q = 1 exactly on the contour; caught by the margin test below.
            if (q < 1.0) err += std::pow(q, nodes) / (1.0 - q);
        }
    if (min_dist <= std::max(margin, 1e-14 * radius))
        throw std::invalid_argument(
            "riesz_projection: an eigenvalue lies within the declared margin of the contour");

    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(h.blocks()));
    for (int b = 0; b < h.blocks(); ++b) {
        const int d = h.algebra().dim(b);
        Mat acc = Mat::Zero(d, d);
        for (int k = 0; k < nodes; ++k) {
            const double th = 2.0 * std::numbers::pi * k / nodes;
            const cxd z = cxd(center, 0.0) + radius * std::exp(cxd(0.0, th));
            // (1/2(pi)i) * resolvent * dz collapses to (r e^{i th} / N) * (z - h)^{-1}.
            const Mat res = (z * Mat::Identity(d, d) - h.block(b)).partialPivLu().solve(
                Mat::Identity(d, d));
            acc += (radius * std::exp(cxd(0.0, th)) / static_cast<double>(nodes)) * res;
        }
        bl.push_back(std::move(acc));
    }
    RieszResult out{Element(h.algebra(), std::move(bl)), err, nodes};
    return out;
}

// Unitary factor of the polar decomposition y = v |y|.  Requires y to be
// safely invertible: the smallest singular value must exceed sigma_tol.
inline Element polar_unitary(const Element& y, double sigma_tol = 1e-10) {
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(y.blocks()));
    for (int b = 0; b < y.blocks(); ++b) {
        Eigen::JacobiSVD<Mat> svd(y.block(b), Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        if (smin <= sigma_tol)
            throw std::invalid_argument(
                "polar_unitary: block " + std::to_string(b) +
                " is numerically singular (sigma_min = " + std::to_string(smin) + ")");
        bl.push_back(svd.matrixU() * svd.matrixV().adjoint());
    }
    Element v(y.algebra(), std::move(bl));
    v.certify_unitary(1e-10);
    if (!v.flags().unitary)
        throw std::runtime_error("polar_unitary: unitary factor failed certification");
    return v;
}

namespace detail {

// Matrix-level principal log of a unitary: the Hermitian a with e^{ia} = u
// and phases in (-pi, pi].  A unitary is normal, so its complex Schur form
// is diagonal (to roundoff) and the Schur basis is an orthonormal
// eigenbasis.
inline Mat principal_log_mat(const Mat& u, double margin) {
    Eigen::ComplexSchur<Mat> schur(u);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("principal_log: Schur iteration failed");
    const Mat& T = schur.matrixT();
    const Mat& Q = schur.matrixU();
    const Eigen::Index d = u.rows();
    Eigen::VectorXd phases(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double phi = std::arg(T(i, i));  // in (-pi, pi]
        if (margin > 0.0 && std::numbers::pi - std::abs(phi) < margin)
            throw std::invalid_argument(
                "principal_log: spectrum too close to -1 for a stable branch");
        phases(i) = phi;
    }
    Mat a = Q * phases.cast<cxd>().asDiagonal() * Q.adjoint();
    return 0.5 * (a + a.adjoint());
}

}  // namespace detail

// Principal logarithm of a unitary: returns the self-adjoint a with
// e^{ia} = u and all eigenvalues of a in (-pi, pi].  If some spectral
// phase comes within `margin` of the branch cut at -1 the logarithm is
// ill-conditioned and we refuse (margin = 0 disables the check).
inline Element principal_log_unitary(const Element& u, double margin = 1e-8) {
    Element uc = u;
    if (!uc.certify_unitary(kFlagTol))
        throw std::invalid_argument("principal_log_unitary: input is not unitary within tolerance");
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(u.blocks()));
    for (int b = 0; b < u.blocks(); ++b) bl.push_back(detail::principal_log_mat(u.block(b), margin));
    Element a(u.algebra(), std::move(bl));
    a.certify_self_adjoint(1e-12);
    return a;
}

// exp(i s a) for self-adjoint a, via one eigendecomposition.
inline Element exp_i(const Element& a, double s = 1.0) {
    const SpectralData sd = eig_hermitian(a);
    Element u = sd.apply([s](double l) { return std::exp(cxd(0.0, s * l)); });
    u.certify_unitary(1e-10);
    return u;
}

}  // namespace cstar
