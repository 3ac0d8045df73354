/*
 * test_algebra.cpp
 *
 * Block algebra arithmetic, norms, and flag certification.  Norms are
 * cross-checked against the power-iteration oracle, and the C*-identity
 * and graph-norm inequalities are exercised as randomized properties.
 */
#include <catch2/catch_amalgamated.hpp>

#include "cstar/algebra.hpp"
#include "cstar/rng.hpp"
#include "support/oracles.hpp"

using namespace cstar;

TEST_CASE("BlockAlgebra validates its dimensions") {
    CHECK_THROWS_AS(BlockAlgebra(std::vector<int>{}), std::invalid_argument);
    CHECK_THROWS_AS(BlockAlgebra({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(BlockAlgebra({-1}), std::invalid_argument);
    const BlockAlgebra a({2, 3, 1});
    CHECK(a.blocks() == 3);
    CHECK(a.total_dim() == 6);
    CHECK(a == BlockAlgebra({2, 3, 1}));
    CHECK(a != BlockAlgebra({3, 2, 1}));
}

TEST_CASE("Element construction checks block shapes") {
    const BlockAlgebra a({2, 3});
    CHECK_THROWS_AS(Element(a, {Mat::Zero(2, 2)}), std::invalid_argument);
    CHECK_THROWS_AS(Element(a, {Mat::Zero(2, 2), Mat::Zero(2, 2)}), std::invalid_argument);
    CHECK_NOTHROW(Element(a, {Mat::Zero(2, 2), Mat::Zero(3, 3)}));
}

TEST_CASE("identity and zero carry certified flags") {
    const BlockAlgebra a({2, 4});
    const Element one = Element::identity(a);
    CHECK(one.flags().unitary);
    CHECK(one.flags().projection);
    CHECK(one.flags().self_adjoint);
    CHECK(operator_norm(one) == Catch::Approx(1.0));
    const Element z = Element::zero(a);
    CHECK(z.flags().self_adjoint);
    CHECK(operator_norm(z) == 0.0);
}

TEST_CASE("mixed-algebra arithmetic is rejected") {
    const BlockAlgebra a({2});
    const BlockAlgebra b({3});
    CHECK_THROWS_AS(Element::identity(a) + Element::identity(b), std::invalid_argument);
    CHECK_THROWS_AS(Element::identity(a) * Element::identity(b), std::invalid_argument);
    CHECK_THROWS_AS(commutator(Element::identity(a), Element::identity(b)),
                    std::invalid_argument);
}

TEST_CASE("flag propagation through arithmetic") {
    const BlockAlgebra a({3});
    Rng rng = seeded_rng(7);
    Element h = random_hermitian(rng, a);
    Element k = random_hermitian(rng, a);
    CHECK((h + k).flags().self_adjoint);
    CHECK((h - k).flags().self_adjoint);
    CHECK_FALSE((h * k).flags().self_adjoint);  // product of s.a. is not s.a. in general
    Element u = random_unitary(rng, a);
    Element v = random_unitary(rng, a);
    CHECK((u * v).flags().unitary);
    CHECK((u * v).unitary_defect() < 1e-12);
    // Mutable block access invalidates certificates.
    u.block(0)(0, 0) += 5.0;
    CHECK_FALSE(u.flags().unitary);
}

TEST_CASE("operator norm matches the power-iteration oracle") {
    Rng rng = seeded_rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const BlockAlgebra a({1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6)});
        std::vector<Mat> bl;
        for (int b = 0; b < a.blocks(); ++b) bl.push_back(random_ginibre(rng, a.dim(b), a.dim(b)));
        const Element x(a, bl);
        double ref = 0.0;
        for (int b = 0; b < a.blocks(); ++b) ref = std::max(ref, oracle::sigma_max(x.block(b)));
        CHECK(operator_norm(x) == Catch::Approx(ref).margin(1e-9).epsilon(1e-9));
    }
}

TEST_CASE("C*-identity holds within 1e-10") {
    Rng rng = seeded_rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const BlockAlgebra a({2 + static_cast<int>(rng() % 5)});
        std::vector<Mat> bl{random_ginibre(rng, a.dim(0), a.dim(0))};
        const Element x(a, bl);
        const double n = operator_norm(x);
        CHECK(std::abs(operator_norm(x.adjoint()) - n) < 1e-10 * std::max(1.0, n));
        CHECK(std::abs(operator_norm(x.adjoint() * x) - n * n) < 1e-10 * std::max(1.0, n * n));
    }
}

TEST_CASE("unitaries have norm one") {
    Rng rng = seeded_rng(17);
    const BlockAlgebra a({4, 2});
    for (int trial = 0; trial < 10; ++trial) {
        const Element u = random_unitary(rng, a);
        CHECK(operator_norm(u) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("commutator identities") {
    Rng rng = seeded_rng(19);
    const BlockAlgebra a({4});
    const Element x = random_hermitian(rng, a);
    const Element y = random_hermitian(rng, a);
    CHECK(operator_norm(commutator(x, y) + commutator(y, x)) < 1e-14);
    // i[h,k] is self-adjoint for self-adjoint h, k.
    Element c = cxd(0.0, 1.0) * commutator(x, y);
    CHECK(c.self_adjoint_defect() < 1e-13);
    CHECK(operator_norm(commutator(x, Element::identity(a))) < 1e-15);
}

TEST_CASE("graph norm dominates both entries") {
    Rng rng = seeded_rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const BlockAlgebra a({2 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 3)});
        std::vector<Mat> xb, db;
        for (int b = 0; b < a.blocks(); ++b) {
            xb.push_back(random_ginibre(rng, a.dim(b), a.dim(b)));
            db.push_back(random_ginibre(rng, a.dim(b), a.dim(b)));
        }
        const Element x(a, xb), dx(a, db);
        const double g = graph_norm(x, dx);
        CHECK(g >= operator_norm(x) - 1e-12);
        CHECK(g >= 0.5 * operator_norm(dx) - 1e-12);
    }
}

TEST_CASE("graph norm is submultiplicative for the derivation product rule") {
    Rng rng = seeded_rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        const BlockAlgebra a({3});
        std::vector<Mat> m1{random_ginibre(rng, 3, 3)}, m2{random_ginibre(rng, 3, 3)},
            m3{random_ginibre(rng, 3, 3)}, m4{random_ginibre(rng, 3, 3)};
        const Element x(a, m1), dx(a, m2), y(a, m3), dy(a, m4);
        const Element xy = x * y;
        const Element dxy = x * dy + dx * y;  // Leibniz pairing
        CHECK(graph_norm(xy, dxy) <= graph_norm(x, dx) * graph_norm(y, dy) + 1e-10);
    }
}
