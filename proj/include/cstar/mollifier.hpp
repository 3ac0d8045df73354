/*
 * mollifier.hpp
 *
 * Band-limited smoothing of a unitary along the time flow of a
 * self-adjoint h.  The kernel is the normalized square of the Fejer
 * kernel ("Jackson" profile),
 *
 *     f(t) = (96 / (pi delta^3)) sin^4(delta t / 4) / t^4,
 *
 * a probability density with first absolute moment
 * M_f = 12 ln 2 / (pi delta) and a Fourier transform supported exactly in
 * [-delta, delta]:
 *
 *     fhat(xi) = (3/2) Q(2 xi / delta),
 *     Q(s) = 2/3 - s^2 + |s|^3 / 2          for |s| <= 1,
 *            (2 - |s|)^3 / 6                for 1 <= |s| <= 2,
 *            0                               for |s| >= 2.
 *
 * The averaged element x = integral f(t) e^{iht} u e^{-iht} dt is computed
 * without any time integration: in an eigenbasis of h it is the Schur
 * multiplier x_{jk} = fhat(mu_j - mu_k) u_{jk}.  This form makes the
 * contraction properties (||x|| <= ||u||, ||[h,x]|| <= ||[h,u]||,
 * ||x - u|| <= M_f ||[h,u]||) inherit from the averaging picture while the
 * band property (no matrix elements across spectral gaps wider than delta)
 * holds exactly, not just approximately.
 */
#pragma once

#include "cstar/algebra.hpp"
#include "cstar/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cstar {

struct MollifierSpec {
    double delta = 0.0;   // Fourier support radius
    double moment = 0.0;  // M_f = integral |t| f(t) dt

    static MollifierSpec jackson(double delta) {
        if (delta <= 0.0) throw std::invalid_argument("MollifierSpec: delta must be positive");
        MollifierSpec s;
        s.delta = delta;
        s.moment = 12.0 * std::numbers::ln2 / (std::numbers::pi * delta);
        return s;
    }

    [[nodiscard]] double fhat(double xi) const {
        const double s = std::abs(2.0 * xi / delta);
        if (s >= 2.0) return 0.0;
        if (s <= 1.0) return 1.5 * (2.0 / 3.0 - s * s + s * s * s / 2.0);
        const double r = 2.0 - s;
        return 1.5 * (r * r * r / 6.0);
    }

    [[nodiscard]] double density(double t) const {
        const double c = 96.0 / (std::numbers::pi * delta * delta * delta);
        if (std::abs(t) < 1e-9) {
            const double q = delta / 4.0;
            return c * q * q * q * q;  // limit of sin^4(delta t/4)/t^4
        }
        const double s = std::sin(delta * t / 4.0);
        return c * s * s * s * s / (t * t * t * t);
    }
};

// Smooths u along h.  Reuses a precomputed eigendecomposition when the
// caller already has one.
inline Element mollify(const Element& u, const SpectralData& sd, const MollifierSpec& spec) {
    if (u.algebra() != sd.alg) throw std::invalid_argument("mollify: algebra mismatch");
    std::vector<Mat> bl;
    bl.reserve(static_cast<size_t>(u.blocks()));
    for (int b = 0; b < u.blocks(); ++b) {
        const Mat& V = sd.eigenvectors[static_cast<size_t>(b)];
        const auto& mu = sd.eigenvalues[static_cast<size_t>(b)];
        Mat w = V.adjoint() * u.block(b) * V;
        for (Eigen::Index j = 0; j < w.rows(); ++j)
            for (Eigen::Index k = 0; k < w.cols(); ++k) w(j, k) *= spec.fhat(mu(j) - mu(k));
        bl.push_back(V * w * V.adjoint());
    }
    return Element(u.algebra(), std::move(bl));
}

inline Element mollify(const Element& u, const Element& h, const MollifierSpec& spec) {
    return mollify(u, eig_hermitian(h), spec);
}

}  // namespace cstar
