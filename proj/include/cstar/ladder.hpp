/* ladder.hpp
 *
 * Hamiltonian ladders over towers of fibered algebras.  A ladder is a
 * chain of levels A_1 -> A_2 -> ... where each arrow is a unital
 * embedding (interval or circle base) and each level carries a constant
 * self-adjoint element H_n built recursively:
 *
 *     H_{n+1} = phi_n(H_n) + sum_{ij} h_{n+1,ij},
 *
 * with the increments h_{n+1,ij} supported in target block i on the
 * slots that came from source block j.  The derivation delta = i[H, .]
 * acts fiberwise on fibered elements of the same level.
 *
 * The gap coefficients a_n are chosen so that compressing by the
 * first-copy projection Q_n costs at least a_n per unit of off-corner
 * mass:
 *
 *     a_{m+1} = (1 + 2||H_m|| + sum_{j>=2} ||h_{m+1,1j}||)
 *               * 4 xi_{m+1} / (eps_m - eps_{m+1}) + 1,
 *
 * where xi_{m+1} is the dimension of the first block of level m+1 and
 * the eps_m are the strictly decreasing window widths attached to the
 * ladder.  With that choice,
 *
 *     ||delta(h)|| >= a_{m+1} ||Q h (1-Q)|| - 2||H_m|| - sum_{j>=2} ||h_{m+1,1j}||
 *
 * for every 0 <= h <= 1 in the first block of level m+1.
 */

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cstar/algebra.hpp"
#include "cstar/fibered.hpp"

namespace cstar {

// One increment h_{n,ij}: an element of the level-n algebra supported in
// target block `target_block` on the slots coming from source block
// `source_block`.
struct IncrementEntry {
    int target_block = 0;
    int source_block = 0;
    Element value;
};

struct LadderLevel {
    BlockAlgebra algebra;
    Element hamiltonian;                   // constant fiber, self-adjoint
    std::vector<IncrementEntry> increments;  // empty at level 1
};

struct HamiltonianLadder {
    Base base = Base::interval;
    std::vector<LadderLevel> levels;     // levels[0] is level 1
    std::vector<EmbeddingSpec> specs;    // specs[m-1]: level m -> level m+1
    std::vector<double> windows;         // eps_1 > eps_2 > ..., eps_1 <= 3/5
    std::vector<double> gap_coefficients;  // a_{n} for n >= 2, aligned at [n-2]

    [[nodiscard]] int depth() const { return static_cast<int>(levels.size()); }
};

// Projection onto the first copy of source block 0 inside target block 0
// of the level `level` algebra (level >= 2; the slot layout guarantees
// that copy occupies the leading coordinates of block 0).
inline Element first_copy_projection(const HamiltonianLadder& ladder, int level) {
    if (level < 2 || level > ladder.depth())
        throw std::invalid_argument("first_copy_projection: level out of range");
    const EmbeddingSpec& spec = ladder.specs[static_cast<size_t>(level - 2)];
    Element q = Element::zero(ladder.levels[static_cast<size_t>(level - 1)].algebra);
    const int d = spec.source.dim(0);
    q.block(0).topLeftCorner(d, d) = Mat::Identity(d, d);
    q.certify_projection(0.0);
    q.certify_self_adjoint(0.0);
    return q;
}

// P_n: the unit of the first block of the level-n algebra.
inline Element first_block_unit(const HamiltonianLadder& ladder, int level) {
    if (level < 1 || level > ladder.depth())
        throw std::invalid_argument("first_block_unit: level out of range");
    const BlockAlgebra& alg = ladder.levels[static_cast<size_t>(level - 1)].algebra;
    Element p = Element::zero(alg);
    p.block(0) = Mat::Identity(alg.dim(0), alg.dim(0));
    p.certify_projection(0.0);
    p.certify_self_adjoint(0.0);
    return p;
}

struct CornerProjections {
    Element P;  // unit of the first block
    Element Q;  // first-copy slot projection, P Q = Q
};

inline CornerProjections corner_projections(const HamiltonianLadder& ladder, int level) {
    return CornerProjections{first_block_unit(ladder, level),
                             first_copy_projection(ladder, level)};
}

// delta = i[H, .] on constant elements ...
inline Element ladder_derivation(const HamiltonianLadder& ladder, int level, const Element& x) {
    if (level < 1 || level > ladder.depth())
        throw std::invalid_argument("ladder_derivation: level out of range");
    const Element& h = ladder.levels[static_cast<size_t>(level - 1)].hamiltonian;
    return commutator(h, x) * cxd(0.0, 1.0);
}

// ... and fiberwise on fibered elements of the same level.
inline FiberedElement ladder_derivation(const HamiltonianLadder& ladder, int level,
                                        const FiberedElement& x) {
    if (level < 1 || level > ladder.depth())
        throw std::invalid_argument("ladder_derivation: level out of range");
    const Element& h = ladder.levels[static_cast<size_t>(level - 1)].hamiltonian;
    if (x.algebra() != h.algebra())
        throw std::invalid_argument("ladder_derivation: element lives at a different level");
    return x.map([&h](const Element& fiber) {
        return commutator(h, fiber) * cxd(0.0, 1.0);
    });
}

// Gap coefficient for the step level m -> m+1.  Needs the embedding spec
// for that step; off-corner increments h_{m+1,1j} (j >= 2) are read from
// level m+1 if it has already been built, otherwise taken as absent.
inline double choose_gap_coefficient(const HamiltonianLadder& ladder, int m) {
    if (m < 1 || m > ladder.depth())
        throw std::invalid_argument("choose_gap_coefficient: level out of range");
    if (static_cast<size_t>(m) > ladder.specs.size())
        throw std::invalid_argument("choose_gap_coefficient: no embedding spec for this step");
    if (static_cast<size_t>(m + 1) > ladder.windows.size())
        throw std::invalid_argument("choose_gap_coefficient: missing window widths");
    const double eps_m = ladder.windows[static_cast<size_t>(m - 1)];
    const double eps_next = ladder.windows[static_cast<size_t>(m)];
    if (!(eps_m > eps_next) || eps_next <= 0.0)
        throw std::invalid_argument("choose_gap_coefficient: windows must decrease strictly");
    const double xi = static_cast<double>(ladder.specs[static_cast<size_t>(m - 1)].target.dim(0));
    const double norm_h = operator_norm(ladder.levels[static_cast<size_t>(m - 1)].hamiltonian);
    double off_row = 0.0;
    if (ladder.depth() > m) {
        for (const IncrementEntry& e : ladder.levels[static_cast<size_t>(m)].increments) {
            if (e.target_block == 0 && e.source_block >= 1)
                off_row += operator_norm(e.value);
        }
    }
    return (1.0 + 2.0 * norm_h + off_row) * 4.0 * xi / (eps_m - eps_next) + 1.0;
}

namespace detail {

inline void check_windows(const std::vector<double>& windows) {
    if (windows.size() < 2)
        throw std::invalid_argument("ladder: need at least two window widths");
    if (windows.front() > 0.6 + 1e-15)
        throw std::invalid_argument("ladder: first window must be at most 3/5");
    for (size_t i = 0; i + 1 < windows.size(); ++i) {
        if (!(windows[i] > windows[i + 1]) || windows[i + 1] <= 0.0)
            throw std::invalid_argument("ladder: windows must decrease strictly and stay positive");
    }
}

// Reconstruction defect of the recursion H_{n+1} = phi(H_n) + increments.
inline double recursion_defect(const HamiltonianLadder& ladder) {
    double worst = 0.0;
    for (size_t m = 0; m + 1 < ladder.levels.size(); ++m) {
        Element rhs = embed_constant(ladder.levels[m].hamiltonian, ladder.specs[m]);
        for (const IncrementEntry& e : ladder.levels[m + 1].increments)
            rhs = rhs + e.value;
        worst = std::max(worst, operator_norm(ladder.levels[m + 1].hamiltonian - rhs));
    }
    return worst;
}

}  // namespace detail

// Interval ladder: single-block levels, H_1 = 0, and at each step the
// only increment is a_{m+1} Q_{m+1} sitting on the first-copy slot.
//
// gap_override, when nonempty, must have one entry per step; entries
// greater than zero replace the formula value of a_{m+1} (used by the
// negative controls, which deliberately under-provision the gap).
inline HamiltonianLadder build_interval_ladder(const std::vector<std::vector<std::vector<int>>>& chis,
                                               const std::vector<double>& windows,
                                               const std::vector<double>& gap_override = {}) {
    detail::check_windows(windows);
    if (chis.empty())
        throw std::invalid_argument("build_interval_ladder: need at least one embedding step");
    if (windows.size() < chis.size() + 1)
        throw std::invalid_argument("build_interval_ladder: need one window per level");
    if (!gap_override.empty() && gap_override.size() != chis.size())
        throw std::invalid_argument("build_interval_ladder: gap_override size mismatch");

    HamiltonianLadder ladder;
    ladder.base = Base::interval;
    ladder.windows = windows;

    BlockAlgebra level1(std::vector<int>{1});
    ladder.levels.push_back(LadderLevel{level1, Element::zero(level1), {}});

    for (size_t m = 0; m < chis.size(); ++m) {
        const BlockAlgebra& src = ladder.levels.back().algebra;
        EmbeddingSpec spec(Base::interval, chis[m], src);
        ladder.specs.push_back(spec);

        double a = choose_gap_coefficient(ladder, static_cast<int>(m) + 1);
        if (!gap_override.empty() && gap_override[m] > 0.0) a = gap_override[m];
        ladder.gap_coefficients.push_back(a);

        LadderLevel next;
        next.algebra = spec.target;
        Element q = Element::zero(spec.target);
        const int d = src.dim(0);
        q.block(0).topLeftCorner(d, d) = Mat::Identity(d, d);
        next.increments.push_back(IncrementEntry{0, 0, q * cxd(a, 0.0)});
        next.hamiltonian = embed_constant(ladder.levels.back().hamiltonian, spec) + q * cxd(a, 0.0);
        next.hamiltonian.certify_self_adjoint(0.0);
        ladder.levels.push_back(std::move(next));
    }

    if (detail::recursion_defect(ladder) > 1e-12)
        throw std::runtime_error("build_interval_ladder: recursion defect");
    return ladder;
}

// Circle ladder: the increment at each step puts +a_n on the first
// companion pair and -a_n on the conjugate companion pair of every
// (i, j) slot group, and 0 on the scalar slots.  With all a_n = 1 the
// spectrum of every H_n is a subset of the integers, so exp(2 pi i H_n)
// is the identity (the periodic case); general amplitudes give the
// scaled ladders.
inline HamiltonianLadder build_circle_ladder(const std::vector<std::vector<std::vector<int>>>& chis,
                                             const std::vector<double>& amplitudes) {
    if (chis.empty())
        throw std::invalid_argument("build_circle_ladder: need at least one embedding step");
    if (amplitudes.size() != chis.size())
        throw std::invalid_argument("build_circle_ladder: need one amplitude per step");

    HamiltonianLadder ladder;
    ladder.base = Base::circle;

    BlockAlgebra level1(std::vector<int>{1});
    ladder.levels.push_back(LadderLevel{level1, Element::zero(level1), {}});

    for (size_t m = 0; m < chis.size(); ++m) {
        const double a = amplitudes[m];
        if (a <= 0.0)
            throw std::invalid_argument("build_circle_ladder: amplitudes must be positive");
        const BlockAlgebra& src = ladder.levels.back().algebra;
        EmbeddingSpec spec(Base::circle, chis[m], src);
        ladder.specs.push_back(spec);
        ladder.gap_coefficients.push_back(a);

        LadderLevel next;
        next.algebra = spec.target;
        for (size_t i = 0; i < chis[m].size(); ++i) {
            for (int j = 0; j < src.blocks(); ++j) {
                const int d = src.dim(j);
                Element inc = Element::zero(spec.target);
                Mat& bm = inc.block(static_cast<int>(i));
                const int off_a = spec.slot_offset(static_cast<int>(i), j, 0);
                const int off_b = off_a + 2 * d;
                bm.block(off_a, off_a, 2 * d, 2 * d) = a * Mat::Identity(2 * d, 2 * d);
                bm.block(off_b, off_b, 2 * d, 2 * d) = -a * Mat::Identity(2 * d, 2 * d);
                inc.certify_self_adjoint(0.0);
                next.increments.push_back(IncrementEntry{static_cast<int>(i), j, std::move(inc)});
            }
        }
        next.hamiltonian = embed_constant(ladder.levels.back().hamiltonian, spec);
        for (const IncrementEntry& e : next.increments)
            next.hamiltonian = next.hamiltonian + e.value;
        next.hamiltonian.certify_self_adjoint(0.0);
        ladder.levels.push_back(std::move(next));
    }

    if (detail::recursion_defect(ladder) > 1e-12)
        throw std::runtime_error("build_circle_ladder: recursion defect");
    return ladder;
}

}  // namespace cstar
