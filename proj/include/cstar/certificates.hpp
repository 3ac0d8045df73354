/* certificates.hpp
 *
 * Measured certificates for the rigidity experiments.  Each certificate
 * takes concrete elements, checks the hypotheses it needs numerically,
 * and returns every quantity it measured; nothing is asserted that was
 * not computed.  Hypothesis failures are reported as `applicable =
 * false` with a reason, while malformed inputs (wrong algebra, not a
 * unitary, not a contraction) throw invalid_argument.
 *
 * Three certificates live here:
 *
 *  - certify_obstruction: for 0 <= h <= 1 in the first block of an
 *    interval-ladder level that is staircase-like (small spectrum
 *    measure) and close to the embedded coordinate generator, measures
 *    the compression chain
 *        ||delta(h)|| >= a_{m+1} ||Q h (1-Q)|| - 2||H_m|| - sum_j ||h_{m+1,1j}||
 *    and reports whether the motion bound ||delta(h)|| > 1 holds.
 *
 *  - corner_invertibility_certificate: for a circle-fibered unitary u
 *    and a constant H with top eigenprojection E1 separated by a gap,
 *    certifies ||E1 u (1-E1)|| <= ||[H, u]||_sup / gap, hence a lower
 *    bound sigma_min(E1 u E1) >= sqrt(1 - bound^2) > 0 whenever the
 *    commutator stays below the gap, and computes the winding number of
 *    the corner determinant when it is bounded away from zero.
 *
 *  - averaged_cobounding: the explicit h_n with [i h_n, c] = i[H, c] for
 *    every c in the diagonal tower algebra C_n, built level by level as
 *    i h_n = sum_k E_{k-1}( sum_j delta(q_j^(k)) q_j^(k) ).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cstar/algebra.hpp"
#include "cstar/fibered.hpp"
#include "cstar/ladder.hpp"
#include "cstar/spectral.hpp"

namespace cstar {

// ---------------------------------------------------------------------------
// Winding numbers of closed sample loops.

// Winding number of a closed loop given by samples z_0, ..., z_{N-1}
// (the segment z_{N-1} -> z_0 closes the loop).  Refuses when a sample
// (nearly) vanishes or when an adjacent phase jump comes within jump_tol
// of pi, since then the discretization no longer pins down the winding.
inline int winding_number(const std::vector<cxd>& samples, double jump_tol = 1e-6) {
    if (samples.size() < 3)
        throw std::invalid_argument("winding_number: need at least three samples");
    double scale = 0.0;
    for (const cxd& z : samples) scale = std::max(scale, std::abs(z));
    if (scale == 0.0)
        throw std::invalid_argument("winding_number: all samples vanish");
    double total = 0.0;
    for (size_t k = 0; k < samples.size(); ++k) {
        const cxd a = samples[k];
        const cxd b = samples[(k + 1) % samples.size()];
        if (std::abs(a) < 1e-12 * scale || std::abs(b) < 1e-12 * scale)
            throw std::invalid_argument("winding_number: a sample vanishes (loop hits zero)");
        const double jump = std::arg(b / a);  // principal branch, (-pi, pi]
        if (std::numbers::pi - std::abs(jump) < jump_tol)
            throw std::invalid_argument(
                "winding_number: adjacent samples nearly antipodal (undersampled loop)");
        total += jump;
    }
    const double turns = total / (2.0 * std::numbers::pi);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 1e-6)
        throw std::runtime_error("winding_number: phase sum is not an integer multiple of 2 pi");
    return static_cast<int>(rounded);
}

// ---------------------------------------------------------------------------
// Obstruction certificate on interval ladders.

struct ObstructionCertificate {
    bool applicable = false;
    std::vector<std::string> hypothesis_violations;

    double gap_coefficient = 0.0;   // a_{m+1} of the ladder step
    double window = 0.0;            // eps_{m+1}
    double norm_h_level = 0.0;      // ||H_m||
    double off_row_norm = 0.0;      // sum_{j>=2} ||h_{m+1,1j}||

    double spectrum_measure = 0.0;    // mu(Sp(h)) over the whole fiber space
    double generator_distance = 0.0;  // sup_t ||h(t) - x(t) P||
    double delta_norm = 0.0;          // sup_t ||delta(h)(t)||
    double q_offdiagonal = 0.0;       // sup_t ||Q h(t) (1-Q)||
    double chain_lower_bound = 0.0;   // a q_off - 2||H_m|| - off_row
    bool chain_holds = false;

    double snapped_distance = 0.0;  // ||h - h~|| for the spectral snap h~
    double snapped_measure = 0.0;   // mu(Sp(h~)), zero up to roundoff

    double endpoint_zero = 0.0;  // ||Q h(0) Q||
    double endpoint_one = 0.0;   // ||Q (1 - h(1)) Q||

    bool verdict = false;  // ||delta(h)|| > 1
};

namespace detail {

// Spectral snap: every eigenvalue is replaced by the midpoint of the
// spectrum component (merged branch range) containing it.
inline FiberedElement snap_to_components(const FiberedElement& h,
                                         const std::vector<std::pair<double, double>>& comps) {
    return h.map([&comps](const Element& fiber) {
        const SpectralData sd = eig_hermitian(fiber, 1e-6);
        return sd.apply([&comps](double l) {
            for (const auto& c : comps)
                if (l >= c.first - 1e-9 && l <= c.second + 1e-9)
                    return 0.5 * (c.first + c.second);
            return l;  // outside every component; leave it alone
        });
    });
}

}  // namespace detail

// Measures the obstruction quantities for h at level m+1 of an interval
// ladder (0 <= h <= 1 required, first block only for multi-block levels).
// Hypotheses checked: sup-distance to the embedded coordinate generator
// at most 1/5, and spectrum measure at most eps_{m+1}.
inline ObstructionCertificate certify_obstruction(const HamiltonianLadder& ladder, int m,
                                                  const FiberedElement& h) {
    if (ladder.base != Base::interval)
        throw std::invalid_argument("certify_obstruction: interval ladder required");
    if (m < 1 || m + 1 > ladder.depth())
        throw std::invalid_argument("certify_obstruction: level step out of range");
    const BlockAlgebra& alg = ladder.levels[static_cast<size_t>(m)].algebra;
    if (h.algebra() != alg)
        throw std::invalid_argument("certify_obstruction: element lives at a different level");
    if (h.space().base != Base::interval)
        throw std::invalid_argument("certify_obstruction: interval fiber space required");

    ObstructionCertificate cert;
    cert.gap_coefficient = ladder.gap_coefficients[static_cast<size_t>(m - 1)];
    cert.window = ladder.windows[static_cast<size_t>(m)];
    cert.norm_h_level = operator_norm(ladder.levels[static_cast<size_t>(m - 1)].hamiltonian);
    for (const IncrementEntry& e : ladder.levels[static_cast<size_t>(m)].increments)
        if (e.target_block == 0 && e.source_block >= 1)
            cert.off_row_norm += operator_norm(e.value);

    // 0 <= h <= 1 is part of the contract, not a hypothesis to survey.
    for (int g = 0; g < h.size(); ++g) {
        const Element& fiber = h.sample(g);
        if (fiber.self_adjoint_defect() > 1e-8)
            throw std::invalid_argument("certify_obstruction: h is not self-adjoint");
        const SpectralData sd = eig_hermitian(fiber, 1e-8);
        if (sd.min_eigenvalue() < -1e-8 || sd.max_eigenvalue() > 1.0 + 1e-8)
            throw std::invalid_argument("certify_obstruction: h is not a positive contraction");
    }

    // Embedded coordinate generator at this level, on h's own grid.
    FiberedElement gen = canonical_x(h.space(), ladder.levels[0].algebra);
    for (int step = 0; step < m; ++step)
        gen = embed_interval(gen, ladder.specs[static_cast<size_t>(step)]);
    const Element p = first_block_unit(ladder, m + 1);
    const Element q = first_copy_projection(ladder, m + 1);
    const Element one = Element::identity(alg);

    for (int g = 0; g < h.size(); ++g) {
        const Element& fiber = h.sample(g);
        cert.generator_distance = std::max(
            cert.generator_distance, operator_norm(fiber - gen.sample(g) * p));
        cert.q_offdiagonal =
            std::max(cert.q_offdiagonal, operator_norm(q * fiber * (one - q)));
    }
    const FiberedElement dh = ladder_derivation(ladder, m + 1, h);
    for (int g = 0; g < dh.size(); ++g)
        cert.delta_norm = std::max(cert.delta_norm, operator_norm(dh.sample(g)));

    const SpectrumMeasure sm = spectrum_measure(h, 1e-9);
    cert.spectrum_measure = sm.measure;

    const FiberedElement snapped = detail::snap_to_components(h, sm.intervals);
    cert.snapped_measure = spectrum_measure(snapped, 1e-9).measure;
    cert.snapped_distance = sup_norm(h - snapped);

    cert.endpoint_zero = operator_norm(q * h.eval(0.0) * q);
    cert.endpoint_one = operator_norm(q * (one - h.eval(1.0)) * q);

    cert.chain_lower_bound =
        cert.gap_coefficient * cert.q_offdiagonal - 2.0 * cert.norm_h_level - cert.off_row_norm;
    cert.chain_holds = cert.delta_norm >= cert.chain_lower_bound - 1e-7 * cert.gap_coefficient;

    if (cert.generator_distance > 0.2)
        cert.hypothesis_violations.push_back("generator distance exceeds 1/5");
    if (cert.spectrum_measure > cert.window)
        cert.hypothesis_violations.push_back("spectrum measure exceeds the level window");
    cert.applicable = cert.hypothesis_violations.empty();
    cert.verdict = cert.delta_norm > 1.0;
    return cert;
}

// ---------------------------------------------------------------------------
// Corner invertibility on circle fibers.

struct CornerCertificate {
    bool applicable = false;  // sup commutator below the threshold a
    double threshold = 0.0;   // a

    double gap = 0.0;        // spectral separation below the top cluster of H
    int corner_rank = 0;     // rank of E1
    double commutator_sup = 0.0;   // sup_theta ||[H, u(theta)]||
    double off_corner_sup = 0.0;   // sup_theta ||E1 u (1-E1)||
    double off_corner_bound = 0.0; // commutator_sup / gap
    double corner_sigma_min = 0.0; // inf_theta sigma_min(E1 u E1 restricted)
    double sigma_lower_bound = 0.0;  // sqrt(1 - bound^2) when bound < 1

    bool invertible = false;       // certified nonvanishing corner
    bool winding_computed = false;
    int winding = 0;               // of det(E1 u E1) around the circle
};

// Certifies invertibility of the compressed corner E1 u(theta) E1 for a
// circle-fibered unitary u against the top eigenprojection E1 of the
// constant self-adjoint H.  The spectral gap of H below its top cluster
// must be at least `a`, otherwise the certificate's premise is absent and
// we refuse.  The commutator hypothesis sup ||[H, u]|| < a is measured;
// when it fails the certificate is returned as not applicable.
inline CornerCertificate corner_invertibility_certificate(const FiberedElement& u,
                                                          const Element& hamiltonian,
                                                          double a,
                                                          double unitary_tol = 1e-8) {
    if (u.space().base != Base::circle)
        throw std::invalid_argument("corner_invertibility_certificate: circle base required");
    if (u.algebra() != hamiltonian.algebra())
        throw std::invalid_argument("corner_invertibility_certificate: algebra mismatch");
    if (a <= 0.0)
        throw std::invalid_argument("corner_invertibility_certificate: threshold must be positive");
    if (hamiltonian.algebra().blocks() != 1)
        throw std::invalid_argument("corner_invertibility_certificate: single-block algebra required");
    for (int g = 0; g < u.size(); ++g) {
        if (u.sample(g).unitary_defect() > unitary_tol)
            throw std::invalid_argument(
                "corner_invertibility_certificate: fiber " + std::to_string(g) +
                " is not unitary within tolerance");
    }

    CornerCertificate cert;
    cert.threshold = a;

    // Top eigencluster of H and its separation from the rest.
    const SpectralData sd = eig_hermitian(hamiltonian);
    const Eigen::VectorXd& ev = sd.eigenvalues[0];
    const double top = ev(ev.size() - 1);
    Eigen::Index first_top = ev.size() - 1;
    while (first_top > 0 && ev(first_top - 1) > top - 1e-9) --first_top;
    if (first_top == 0)
        throw std::invalid_argument(
            "corner_invertibility_certificate: H has no spectrum below its top cluster");
    cert.corner_rank = static_cast<int>(ev.size() - first_top);
    cert.gap = ev(first_top) - ev(first_top - 1);
    if (cert.gap < a)
        throw std::invalid_argument(
            "corner_invertibility_certificate: gap hypothesis unverified (gap < threshold)");

    const Mat basis = sd.eigenvectors[0].rightCols(cert.corner_rank);

    std::vector<cxd> dets;
    dets.reserve(static_cast<size_t>(u.size()));
    for (int g = 0; g < u.size(); ++g) {
        const Mat& ub = u.sample(g).block(0);
        cert.commutator_sup = std::max(
            cert.commutator_sup, operator_norm(commutator(hamiltonian, u.sample(g))));
        // Off-corner block in the eigenbasis: rows in E1, columns out.
        const Mat full = sd.eigenvectors[0].adjoint() * ub * sd.eigenvectors[0];
        const Mat off = full.bottomLeftCorner(cert.corner_rank,
                                              ev.size() - cert.corner_rank);
        cert.off_corner_sup = std::max(cert.off_corner_sup, operator_norm(Mat(off)));
        const Mat corner = basis.adjoint() * ub * basis;
        Eigen::JacobiSVD<Mat> svd(corner);
        const double smin = svd.singularValues().minCoeff();
        cert.corner_sigma_min = g == 0 ? smin : std::min(cert.corner_sigma_min, smin);
        dets.push_back(corner.determinant());
    }

    cert.applicable = cert.commutator_sup < a;
    cert.off_corner_bound = cert.commutator_sup / cert.gap;
    if (cert.off_corner_sup > cert.off_corner_bound + 1e-8)
        throw std::runtime_error(
            "corner_invertibility_certificate: measured off-corner norm violates the "
            "commutator/gap bound");
    if (cert.off_corner_bound < 1.0) {
        cert.sigma_lower_bound =
            std::sqrt(1.0 - cert.off_corner_bound * cert.off_corner_bound);
        cert.invertible = cert.applicable && cert.corner_sigma_min > 0.0;
        if (cert.invertible && cert.corner_sigma_min < cert.sigma_lower_bound - 1e-8)
            throw std::runtime_error(
                "corner_invertibility_certificate: corner singular value fell below its "
                "certified bound");
    }

    try {
        cert.winding = winding_number(dets);
        cert.winding_computed = true;
    } catch (const std::invalid_argument&) {
        cert.winding_computed = false;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Averaged cobounding on diagonal towers.

namespace detail {

// Class index of each coordinate under "first k tensor factors equal".
inline std::vector<int> prefix_classes(const std::vector<int>& level_dims, int k) {
    int total = 1;
    for (int d : level_dims) total *= d;
    int suffix = total;
    for (int i = 0; i < k; ++i) suffix /= level_dims[static_cast<size_t>(i)];
    std::vector<int> cls(static_cast<size_t>(total));
    for (int r = 0; r < total; ++r) cls[static_cast<size_t>(r)] = r / suffix;
    return cls;
}

// Entry mask keeping only entries whose coordinates share a prefix class.
inline Mat mask_to_classes(const Mat& x, const std::vector<int>& cls) {
    Mat out = x;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c)
            if (cls[static_cast<size_t>(r)] != cls[static_cast<size_t>(c)]) out(r, c) = 0.0;
    return out;
}

}  // namespace detail

// The cobounding element h_n for the diagonal tower C_1 c C_2 c ... c C_n
// inside the single full matrix block: i h_n = sum_{k=1..n} E_{k-1}(
// sum_j delta(q_j^(k)) q_j^(k) ), where q_j^(k) are the minimal diagonal
// projections of C_k and E_{k-1} is the conditional expectation onto the
// block-diagonal part with respect to C_{k-1}.  Satisfies [i h_n, c] =
// i [H, c] for every c in C_n, and ||h_n|| <= 2 ||H||.
inline Element averaged_cobounding(const Element& hamiltonian,
                                   const std::vector<int>& level_dims) {
    if (hamiltonian.algebra().blocks() != 1)
        throw std::invalid_argument("averaged_cobounding: single-block algebra required");
    if (hamiltonian.self_adjoint_defect() > kFlagTol)
        throw std::invalid_argument("averaged_cobounding: H must be self-adjoint");
    if (level_dims.empty())
        throw std::invalid_argument("averaged_cobounding: need at least one tower level");
    int total = 1;
    for (int d : level_dims) {
        if (d < 2) throw std::invalid_argument("averaged_cobounding: level dims must be >= 2");
        total *= d;
    }
    if (total != hamiltonian.algebra().dim(0))
        throw std::invalid_argument(
            "averaged_cobounding: tower dimensions do not multiply to the algebra dimension");

    const Mat& H = hamiltonian.block(0);
    const int n = static_cast<int>(level_dims.size());
    Mat ih = Mat::Zero(total, total);
    for (int k = 1; k <= n; ++k) {
        const std::vector<int> cls_k = detail::prefix_classes(level_dims, k);
        // sum_j delta(q_j) q_j has entry i H_rc exactly when the k-prefixes
        // of r and c differ.
        Mat layer = cxd(0.0, 1.0) * (H - detail::mask_to_classes(H, cls_k));
        if (k > 1) {
            const std::vector<int> cls_prev = detail::prefix_classes(level_dims, k - 1);
            layer = detail::mask_to_classes(layer, cls_prev);
        }
        ih += layer;
    }
    // h_n = -i (i h_n).
    Element h(hamiltonian.algebra(), {cxd(0.0, -1.0) * ih});
    h.certify_self_adjoint(1e-12);
    return h;
}

// Minimal diagonal projection q_j of C_k (prefix class j), handy for tests
// and for the Monte Carlo cross-check of the averaging identity.
inline Element tower_projection(const BlockAlgebra& alg, const std::vector<int>& level_dims,
                                int k, int j) {
    const std::vector<int> cls = detail::prefix_classes(level_dims, k);
    Element q = Element::zero(alg);
    for (int r = 0; r < alg.dim(0); ++r)
        if (cls[static_cast<size_t>(r)] == j) q.block(0)(r, r) = 1.0;
    q.certify_projection(0.0);
    return q;
}

}  // namespace cstar
