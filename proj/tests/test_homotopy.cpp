/*
 * test_homotopy.cpp
 *
 * Bin decomposition, surgery, path assembly, and the full pipeline on
 * small random instances.  The structural identities (partitions of
 * unity, exact localization, staircase commutation) are asserted at
 * roundoff scale; the analytic bounds (distance to u, commutator budget,
 * length budget) at their documented tolerances.
 */
#include <catch2/catch_amalgamated.hpp>

#include "cstar/homotopy.hpp"
#include "cstar/instances.hpp"
#include "cstar/rng.hpp"

#include <numbers>
#include <sstream>

using namespace cstar;

TEST_CASE("bin projections tile the spectrum with half-open windows") {
    Rng rng = seeded_rng(501);
    const BlockAlgebra a({6, 3});
    const Element h = random_hermitian(rng, a, 1.0);
    const double delta = 1.0 / 16.0;
    const BinDecomposition bd = bin_projections(h, delta);

    Element sum = Element::zero(a);
    for (int k = bd.kmin; k <= bd.kmax; ++k) sum += bd.bin(k);
    CHECK(operator_norm(sum - Element::identity(a)) < 1e-12);
    CHECK(operator_norm(h - bd.step) <= delta + 1e-12);
    CHECK(bd.tail_rank(bd.kmin) == a.total_dim());
    CHECK(operator_norm(bd.tail(bd.kmin) - Element::identity(a)) < 1e-12);
    CHECK(operator_norm(bd.tail(bd.kmax + 1)) < 1e-15);
    // Tails are nested projections.
    for (int n = bd.kmin; n <= bd.kmax; ++n) {
        const Element En = bd.tail(n), En1 = bd.tail(n + 1);
        CHECK(En.projection_defect() < 1e-12);
        CHECK(operator_norm(En * En1 - En1) < 1e-12);  // E_{n+1} <= E_n
    }
    // Eigenvalue at a window edge lands in the upper bin.
    std::vector<Mat> mb{Mat::Zero(2, 2)};
    mb[0](0, 0) = delta;       // = (2*1 - 1) delta, lower edge of bin 1
    mb[0](1, 1) = -delta;      // lower edge of bin 0
    const BlockAlgebra a2({2});
    Element h2(a2, mb);
    h2.certify_self_adjoint();
    const BinDecomposition bd2 = bin_projections(h2, delta);
    CHECK(bd2.kmin == 0);
    CHECK(bd2.kmax == 1);
    CHECK(bd2.ranks[0] == 1);
    CHECK(bd2.ranks[1] == 1);
}

namespace {

struct PreparedInstance {
    Element h, u, x, v;
    BinDecomposition bd;
    SurgeryResult sr;
    double eps;
};

PreparedInstance prepare(Rng& rng, int dim, double eps) {
    PreparedInstance pi;
    pi.eps = eps;
    const HomotopyInstance inst = homotopy_instance(rng, dim, eps);
    pi.h = inst.h;
    pi.u = inst.u;
    const SpectralData sd = eig_hermitian(pi.h);
    pi.x = mollify(pi.u, sd, MollifierSpec::jackson(eps / 16.0));
    pi.bd = bin_projections(sd, eps / 16.0);
    pi.sr = surgery(pi.x, pi.bd);
    pi.v = pi.sr.v;
    return pi;
}

}  // namespace

TEST_CASE("surgery produces an exactly band-localized unitary near u") {
    Rng rng = seeded_rng(503);
    for (const auto& [dim, eps] : std::vector<std::pair<int, double>>{{4, 1.0}, {8, 0.5}, {6, 1.0}}) {
        const PreparedInstance pi = prepare(rng, dim, eps);
        const double mu = operator_norm(pi.x - pi.u);

        CHECK(pi.v.unitary_defect() < 1e-10);
        CHECK(pi.sr.partition_defect < 1e-12);
        CHECK(pi.sr.near_projection_defect < 0.05);  // mu here is tiny
        // Localization: v e_k v* lives in the two-bin window exactly.
        const Element one = Element::identity(pi.h.algebra());
        for (int k = pi.bd.kmin; k <= pi.bd.kmax; ++k) {
            Element window = pi.bd.bin(k);
            if (pi.bd.has(k + 1)) window += pi.bd.bin(k + 1);
            CHECK(operator_norm((one - window) * (pi.v * pi.bd.bin(k) * pi.v.adjoint())) < 1e-10);
        }
        // Staircase moves by at most 2 delta under conjugation.
        CHECK(operator_norm(pi.v * pi.bd.step * pi.v.adjoint() - pi.bd.step) <=
              2.0 * (eps / 16.0) + 1e-10);
        // Distance chain from the analysis.
        CHECK(operator_norm(pi.v - pi.u) < 10.0 * (mu + std::sqrt(mu)));
    }
}

TEST_CASE("assembled path hits its endpoints and stays unitary") {
    Rng rng = seeded_rng(509);
    const PreparedInstance pi = prepare(rng, 6, 1.0);
    AssemblyDiagnostics ad;
    const UnitaryPath path = assemble_path(pi.u, pi.v, pi.bd, &ad);

    REQUIRE(path.segment_count() == 4);
    CHECK(operator_norm(path.start() - Element::identity(pi.h.algebra())) < 1e-12);
    CHECK(operator_norm(path.end() - pi.u) < 1e-9);
    CHECK(path.structural_defect() < 1e-10);
    CHECK(ad.w_partition_defect < 1e-10);
    CHECK(ad.z_partition_defect < 1e-10);
    CHECK(ad.c_commutation_defect < 1e-9);
    CHECK(ad.c_reconstruction < 1e-10);
    // Segment lengths: the unwind is at most pi, each swap at most pi/2,
    // and the bridge is short.
    const auto& segs = path.segments();
    CHECK(segs[0].length() <= std::numbers::pi + 1e-9);
    CHECK(segs[1].length() <= std::numbers::pi / 2.0 + 1e-9);
    CHECK(segs[2].length() <= std::numbers::pi / 2.0 + 1e-9);
    CHECK(segs[3].length() < 1.2);
}

TEST_CASE("full pipeline passes its own verification on random instances") {
    Rng rng = seeded_rng(521);
    for (const auto& [dim, eps] : std::vector<std::pair<int, double>>{{2, 1.0}, {5, 0.5}, {8, 1.0},
                                                                      {3, 0.5}}) {
        const HomotopyInstance inst = homotopy_instance(rng, dim, eps);
        const HomotopyRun run = run_homotopy(inst.u, inst.h, eps);
        INFO("dim " << dim << " eps " << eps << " stage " << run.report.failure_stage);
        CHECK(run.report.pass);
        CHECK(run.report.endpoint_start_defect <= 1e-8);
        CHECK(run.report.endpoint_end_defect <= 1e-8);
        CHECK(run.report.sampled_sup_comm + run.report.lipschitz_slack < eps);
        CHECK(run.report.total_length <= 3.0 * std::numbers::pi + eps);
        CHECK(run.report.comm_hu <= eps / 40.0);
        CHECK(run.report.comm_hu >= 0.9 * eps / 40.0);
        for (const auto& s : run.report.segments) {
            CHECK(s.samples >= 200);
            CHECK(s.max_unitarity_defect <= 1e-10);
        }
    }
}

TEST_CASE("pipeline rejects inadmissible inputs") {
    Rng rng = seeded_rng(523);
    const BlockAlgebra a({4});
    const Element h = random_hermitian(rng, a, 1.0);
    const Element u = random_unitary(rng, a);  // generic: huge commutator
    CHECK_THROWS_AS(run_homotopy(u, h, 1.0), std::invalid_argument);
    const Element big_h = random_hermitian(rng, a, 2.0);
    CHECK_THROWS_AS(run_homotopy(Element::identity(a), big_h, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(run_homotopy(Element::identity(a), h, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(run_homotopy(Element::identity(a), h, 0.0), std::invalid_argument);
    // Identity itself is fine: zero commutator, trivial path.
    const HomotopyRun run = run_homotopy(Element::identity(a), h, 1.0);
    CHECK(run.report.pass);
}

TEST_CASE("report serializes and the trace writer emits well-formed CSV") {
    Rng rng = seeded_rng(541);
    const HomotopyInstance inst = homotopy_instance(rng, 4, 1.0);
    const HomotopyRun run = run_homotopy(inst.u, inst.h, 1.0);
    const nlohmann::json j = to_json(run.report);
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("inputs").at("eps").get<double>() == 1.0);
    CHECK(j.at("segments").size() == 4);
    CHECK(j.at("verification").at("total_length").get<double>() ==
          Catch::Approx(run.report.total_length));

    std::ostringstream os;
    write_csv_trace(run.path, inst.h, os, 16);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "t,segment,comm_norm,unitarity_defect,accumulated_length");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == 4 * 16);
}

TEST_CASE("instance generator lands the commutator in the window") {
    Rng rng = seeded_rng(547);
    for (int dim : {2, 8, 16}) {
        const HomotopyInstance inst = homotopy_instance(rng, dim, 0.5);
        CHECK(operator_norm(inst.h) == Catch::Approx(1.0).margin(1e-10));
        CHECK(inst.u.unitary_defect() < 1e-10);
        const double nu = 0.5 / 40.0;
        CHECK(inst.comm >= 0.9 * nu);
        CHECK(inst.comm < 0.98 * nu);
    }
}
