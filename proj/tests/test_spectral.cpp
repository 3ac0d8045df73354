/*
 * test_spectral.cpp
 *
 * Eigendecomposition, spectral and Riesz projections, polar factor, and
 * the principal unitary logarithm.  The Riesz quadrature is compared
 * against the exact spectral projection and its reported error estimate
 * is required to bound the true error.
 */
#include <catch2/catch_amalgamated.hpp>

#include "cstar/rng.hpp"
#include "cstar/spectral.hpp"

#include <numbers>

using namespace cstar;

namespace {

Element diag_elem(const BlockAlgebra& a, const std::vector<double>& vals) {
    std::vector<Mat> bl;
    int k = 0;
    for (int b = 0; b < a.blocks(); ++b) {
        Mat m = Mat::Zero(a.dim(b), a.dim(b));
        for (int i = 0; i < a.dim(b); ++i) m(i, i) = vals.at(static_cast<size_t>(k++));
        bl.push_back(m);
    }
    Element e(a, std::move(bl));
    e.certify_self_adjoint();
    return e;
}

}  // namespace

TEST_CASE("eig_hermitian reconstructs and sorts") {
    Rng rng = seeded_rng(101);
    const BlockAlgebra a({5, 3});
    const Element h = random_hermitian(rng, a, 2.5);
    const SpectralData sd = eig_hermitian(h);
    for (int b = 0; b < a.blocks(); ++b) {
        const Mat rec = sd.eigenvectors[b] * sd.eigenvalues[b].cast<cxd>().asDiagonal() *
                        sd.eigenvectors[b].adjoint();
        CHECK((rec - h.block(b)).norm() < 1e-10);
        for (int i = 0; i + 1 < a.dim(b); ++i)
            CHECK(sd.eigenvalues[b](i) <= sd.eigenvalues[b](i + 1));
        CHECK((sd.eigenvectors[b].adjoint() * sd.eigenvectors[b] -
               Mat::Identity(a.dim(b), a.dim(b))).norm() < 1e-12);
    }
    Element not_sa = h;
    not_sa.block(0)(0, 1) += cxd(0.0, 0.5);
    CHECK_THROWS_AS(eig_hermitian(not_sa), std::invalid_argument);
}

TEST_CASE("spectral projection uses half-open windows") {
    const BlockAlgebra a({3});
    const Element h = diag_elem(a, {0.0, 1.0, 2.0});
    const SpectralData sd = eig_hermitian(h);
    const Element p01 = spectral_projection(sd, 0.0, 1.0);   // catches 0 only
    const Element p12 = spectral_projection(sd, 1.0, 2.0);   // catches 1 only
    CHECK(std::real(p01.block(0).trace()) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::real(p12.block(0).trace()) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(p01.block(0)(0, 0) - cxd(1.0)) < 1e-14);
    CHECK(std::abs(p12.block(0)(1, 1) - cxd(1.0)) < 1e-14);
    CHECK_THROWS_AS(spectral_projection(sd, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("disjoint spectral cover sums to the identity within 1e-12") {
    Rng rng = seeded_rng(103);
    for (int trial = 0; trial < 15; ++trial) {
        const BlockAlgebra a({4, 3});
        const Element h = random_hermitian(rng, a, 1.0);
        const SpectralData sd = eig_hermitian(h);
        // Half-open windows tiling [-1, 1 + eps): their projections must
        // resolve the identity exactly.
        Element sum = Element::zero(a);
        const double lo = -1.0 - 1e-9, hi = 1.0 + 1e-6;
        const int pieces = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < pieces; ++k) {
            const double w = (hi - lo) / pieces;
            sum += spectral_projection(sd, lo + k * w, lo + (k + 1) * w);
        }
        CHECK(operator_norm(sum - Element::identity(a)) < 1e-12);
        const Element p = spectral_projection(sd, 0.0, hi);
        CHECK(p.projection_defect() < 1e-12);
        CHECK(operator_norm(commutator(p, h)) < 1e-12);
    }
}

TEST_CASE("riesz projection matches the spectral projection and its estimate is honest") {
    Rng rng = seeded_rng(107);
    for (int trial = 0; trial < 12; ++trial) {
        const BlockAlgebra a({5});
        // Spectrum split into two well-separated clusters around 0 and 1.
        std::vector<double> vals;
        std::uniform_real_distribution<double> u(-0.12, 0.12);
        for (int i = 0; i < 3; ++i) vals.push_back(u(rng));
        for (int i = 0; i < 2; ++i) vals.push_back(1.0 + u(rng));
        Element h = diag_elem(a, vals);
        const Element w = random_unitary(rng, a);
        h = w * h * w.adjoint();
        h.certify_self_adjoint();

        const SpectralData sd = eig_hermitian(h);
        const Element exact = spectral_projection(sd, -0.5, 0.5);
        const RieszResult rr = riesz_projection(h, 0.0, 0.5, 64);
        const double err = operator_norm(rr.projection - exact);
        // Margin here is at least 0.38 * radius, so 64 nodes push the
        // quadrature error to roundoff.
        CHECK(err < 1e-8);
        CHECK(err <= rr.error_estimate + 1e-12);
    }
}

TEST_CASE("riesz estimate bounds the true error for awkward margins") {
    Rng rng = seeded_rng(109);
    for (int trial = 0; trial < 10; ++trial) {
        const BlockAlgebra a({6});
        const Element h = random_hermitian(rng, a, 1.0);
        const SpectralData sd = eig_hermitian(h);
        // Contour through a random spectral midpoint; margins can be thin,
        // the estimate must still dominate the actual error.
        const auto& ev = sd.eigenvalues[0];
        const int cut = 1 + static_cast<int>(rng() % 4);
        const double boundary = 0.5 * (ev(cut - 1) + ev(cut));
        const double center = ev(0) - 0.1;
        const double radius = boundary - center;
        if (radius <= 0.05) continue;
        const Element exact = spectral_projection(sd, center - radius - 1e-9, boundary);
        int nodes = 48 + static_cast<int>(rng() % 64);
        RieszResult rr;
        try {
            rr = riesz_projection(h, center, radius, nodes);
        } catch (const std::invalid_argument&) {
            continue;  // eigenvalue too close to the contour, correctly refused
        }
        CHECK(operator_norm(rr.projection - exact) <= rr.error_estimate + 1e-10);
    }
}

TEST_CASE("riesz projection refuses contours near the spectrum") {
    const BlockAlgebra a({2});
    const Element h = diag_elem(a, {0.0, 1.0});
    CHECK_THROWS_AS(riesz_projection(h, 0.0, 1.0, 64, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(riesz_projection(h, 0.0, 0.9999999, 64, 0.01), std::invalid_argument);
    CHECK_NOTHROW(riesz_projection(h, 0.0, 0.5, 64, 0.1));
}

TEST_CASE("polar factor is unitary and reproduces the input") {
    Rng rng = seeded_rng(113);
    for (int trial = 0; trial < 20; ++trial) {
        const BlockAlgebra a({4, 2});
        std::vector<Mat> bl;
        for (int b = 0; b < a.blocks(); ++b)
            bl.push_back(random_ginibre(rng, a.dim(b), a.dim(b)) +
                         3.0 * Mat::Identity(a.dim(b), a.dim(b)));
        const Element y(a, bl);
        const Element v = polar_unitary(y);
        CHECK(v.unitary_defect() < 1e-10);
        // |y| = (y* y)^{1/2} via the spectral calculus.
        const SpectralData sd = eig_hermitian(y.adjoint() * y, 1e-6);
        const Element absy = sd.apply([](double l) { return std::sqrt(std::max(l, 0.0)); });
        CHECK(operator_norm(v * absy - y) < 1e-9);
    }
    // Unitary input: polar factor is the input itself.
    const BlockAlgebra a({3});
    const Element u = random_unitary(rng, a);
    CHECK(operator_norm(polar_unitary(u) - u) < 1e-10);
    // Singular input is refused.
    Mat sing = Mat::Zero(3, 3);
    sing(0, 0) = 1.0;
    CHECK_THROWS_AS(polar_unitary(Element(a, {sing})), std::invalid_argument);
}

TEST_CASE("principal log inverts the exponential with phases in (-pi, pi]") {
    Rng rng = seeded_rng(127);
    for (int trial = 0; trial < 20; ++trial) {
        const BlockAlgebra a({4});
        // Build u = exp(i a0) with ||a0|| < pi - margin so the branch is safe.
        const Element a0 = random_hermitian(rng, a, 2.9);
        const Element u = exp_i(a0);
        const Element lg = principal_log_unitary(u);
        CHECK(lg.self_adjoint_defect() < 1e-10);
        CHECK(operator_norm(lg) <= std::numbers::pi + 1e-12);
        CHECK(operator_norm(exp_i(lg) - u) < 1e-10);
        // The principal branch reproduces the generator itself here.
        CHECK(operator_norm(lg - a0) < 1e-8);
    }
}

TEST_CASE("principal log refuses spectrum at -1 unless the margin is disabled") {
    const BlockAlgebra a({2});
    Element minus_one = cxd(-1.0, 0.0) * Element::identity(a);
    minus_one.certify_unitary();
    CHECK_THROWS_AS(principal_log_unitary(minus_one), std::invalid_argument);
    const Element lg = principal_log_unitary(minus_one, 0.0);
    CHECK(operator_norm(lg) == Catch::Approx(std::numbers::pi));
    CHECK(operator_norm(exp_i(lg) - minus_one) < 1e-12);
    CHECK_THROWS_AS(principal_log_unitary(Element::identity(a) * cxd(2.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("exp_i composes additively in the parameter") {
    Rng rng = seeded_rng(131);
    const BlockAlgebra a({5});
    const Element h = random_hermitian(rng, a, 1.7);
    const Element u = exp_i(h, 0.3) * exp_i(h, 0.45);
    CHECK(operator_norm(u - exp_i(h, 0.75)) < 1e-12);
    CHECK(exp_i(h, 1.0).unitary_defect() < 1e-12);
}
