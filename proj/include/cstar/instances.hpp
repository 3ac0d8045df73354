/*
 * instances.hpp
 *
 * Randomized problem instances for the experiment drivers.  Every
 * generator takes an explicit Rng so the experiments stay reproducible.
 */
#pragma once

#include "cstar/algebra.hpp"
#include "cstar/fibered.hpp"
#include "cstar/ladder.hpp"
#include "cstar/rng.hpp"
#include "cstar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cstar {

struct HomotopyInstance {
    Element h;          // self-adjoint, ||h|| = 1, spectrum spread over [-1, 1]
    Element u;          // unitary with ||[h, u]|| tuned into the admissible window
    double comm = 0.0;  // achieved ||[h, u]||
};

// Builds (h, u) with ||[h, u]|| in [0.9, 0.98) * (eps / 40).  The unitary
// is a commuting phase rotation composed with a small generic twist
// exp(i sigma S); the twist angle is bisected until the commutator lands
// in the window.  Keeping sigma small keeps u well inside the regime the
// path construction needs while the commutator stays representative.
inline HomotopyInstance homotopy_instance(Rng& rng, int dim, double eps) {
    if (dim < 2) throw std::invalid_argument("homotopy_instance: dim must be at least 2");
    const double nu = eps / 40.0;
    const BlockAlgebra alg({dim});

    // Spectrum: sorted uniforms pinned to [-1, 1] exactly, so ||h|| = 1.
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> lam(static_cast<size_t>(dim));
    for (double& l : lam) l = unif(rng);
    std::sort(lam.begin(), lam.end());
    const double lo = lam.front(), hi = lam.back();
    for (double& l : lam) l = (hi > lo) ? (2.0 * (l - lo) / (hi - lo) - 1.0) : 0.0;
    const Mat V = random_unitary_block(rng, dim);
    Eigen::VectorXcd diag(dim);
    for (int i = 0; i < dim; ++i) diag(i) = lam[static_cast<size_t>(i)];
    Element h(alg, {V * diag.asDiagonal() * V.adjoint()});
    h.certify_self_adjoint();

    // Commuting part: shared eigenbasis, phases clear of the -1 cut.
    std::uniform_real_distribution<double> phase(-2.8, 2.8);
    Eigen::VectorXcd ph(dim);
    for (int i = 0; i < dim; ++i) ph(i) = std::exp(cxd(0.0, phase(rng)));
    const Mat uc = V * ph.asDiagonal() * V.adjoint();

    const Element s0 = random_hermitian(rng, alg, 1.0);
    const auto twist = [&](double sigma) {
        Element u(alg, {(exp_i(s0, sigma).block(0) * uc).eval()});
        u.certify_unitary();
        return u;
    };
    const auto comm_of = [&](double sigma) {
        return operator_norm(commutator(h, twist(sigma)));
    };

    // Bracket the window and bisect.  f(0) = 0 and f grows continuously,
    // so the window [0.9 nu, 0.98 nu) is always reachable.
    double sig_hi = nu;
    while (comm_of(sig_hi) < 0.98 * nu) {
        sig_hi *= 2.0;
        if (sig_hi > 1e3) throw std::runtime_error("homotopy_instance: bracketing failed");
    }
    double sig_lo = 0.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (sig_lo + sig_hi);
        const double c = comm_of(mid);
        if (c < 0.9 * nu)
            sig_lo = mid;
        else if (c >= 0.98 * nu)
            sig_hi = mid;
        else {
            HomotopyInstance inst{h, twist(mid), c};
            return inst;
        }
    }
    throw std::runtime_error("homotopy_instance: bisection failed to land in the window");
}

// ---------------------------------------------------------------------------
// Staircase instances on interval ladders.
//
// The embedded coordinate generator at level m+1 is diagonal in the slot
// basis with entries that are exact linear functions of t (composition of
// the affine reparametrizations picked up at each embedding step).  A
// staircase instance tracks its sorted eigenvalue branches with constant
// levels and hands slots over between branches inside short rotation
// windows around the branch crossings, so its spectrum stays (nearly)
// finite while it follows the generator within the 1/5 margin.

struct SlotFunction {
    double slope = 0.0;
    double offset = 0.0;
    [[nodiscard]] double at(double t) const { return slope * t + offset; }
};

// Composite slot functions of the m-fold embedded coordinate generator,
// in the exact slot order of the embedding layout.
inline std::vector<SlotFunction> slot_functions(const HamiltonianLadder& ladder, int m) {
    if (ladder.base != Base::interval)
        throw std::invalid_argument("slot_functions: interval ladder required");
    if (m < 1 || m + 1 > ladder.depth())
        throw std::invalid_argument("slot_functions: level step out of range");
    std::vector<SlotFunction> fns{{1.0, 0.0}};
    for (int step = 0; step < m; ++step) {
        const auto& chi = ladder.specs[static_cast<size_t>(step)].chi;
        if (chi.size() != 1 || chi[0].size() != 1)
            throw std::invalid_argument("slot_functions: single-block chains only");
        const int mult = chi[0][0];
        std::vector<SlotFunction> next;
        next.reserve(fns.size() * static_cast<size_t>(mult));
        for (int copy = 0; copy < mult; ++copy) {
            // Copy 0 is the identity reparametrization; copy l >= 1 is
            // t -> (t + l - 1) / (mult - 1).
            const double a = copy == 0 ? 1.0 : 1.0 / (mult - 1);
            const double b = copy == 0 ? 0.0 : static_cast<double>(copy - 1) / (mult - 1);
            for (const SlotFunction& f : fns)
                next.push_back(SlotFunction{f.slope * a, f.slope * b + f.offset});
        }
        fns = std::move(next);
    }
    return fns;
}

struct CrossingGroup {
    double t = 0.0;
    double value = 0.0;
    std::vector<int> slots;  // sorted by slope descending, ties by index
};

// All interior crossing points of the slot functions, clustered by
// (t, value).  Slots carrying identical functions never cross.
inline std::vector<CrossingGroup> slot_crossings(const std::vector<SlotFunction>& fns) {
    struct Hit {
        double t, v;
        int a, b;
    };
    std::vector<Hit> hits;
    for (size_t i = 0; i < fns.size(); ++i)
        for (size_t j = i + 1; j < fns.size(); ++j) {
            const double ds = fns[i].slope - fns[j].slope;
            if (std::abs(ds) < 1e-12) continue;
            const double t = (fns[j].offset - fns[i].offset) / ds;
            if (t <= 1e-9 || t >= 1.0 - 1e-9) continue;
            hits.push_back(Hit{t, fns[i].at(t), static_cast<int>(i), static_cast<int>(j)});
        }
    // Cluster in two passes (t first, then v inside each t cluster).  A
    // single sorted sweep keyed on (t, v) is not safe here: hits at one
    // geometric point differ by ulps in t, so the sort interleaves them
    // with hits at other values and a head-only comparison splits groups.
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t < y.t; });
    std::vector<CrossingGroup> groups;
    size_t lo = 0;
    while (lo < hits.size()) {
        size_t hi = lo + 1;
        while (hi < hits.size() && std::abs(hits[hi].t - hits[lo].t) <= 1e-9) ++hi;
        std::sort(hits.begin() + static_cast<std::ptrdiff_t>(lo),
                  hits.begin() + static_cast<std::ptrdiff_t>(hi),
                  [](const Hit& x, const Hit& y) { return x.v < y.v; });
        for (size_t k = lo; k < hi; ++k) {
            if (k == lo || std::abs(hits[k].v - groups.back().value) > 1e-9)
                groups.push_back(CrossingGroup{hits[k].t, hits[k].v, {}});
            for (int s : {hits[k].a, hits[k].b}) {
                auto& sl = groups.back().slots;
                if (std::find(sl.begin(), sl.end(), s) == sl.end()) sl.push_back(s);
            }
        }
        lo = hi;
    }
    for (CrossingGroup& g : groups) {
        std::sort(g.slots.begin(), g.slots.end(), [&fns](int a, int b) {
            if (fns[static_cast<size_t>(a)].slope != fns[static_cast<size_t>(b)].slope)
                return fns[static_cast<size_t>(a)].slope > fns[static_cast<size_t>(b)].slope;
            return a < b;
        });
    }
    return groups;
}

struct ObstructionSampleOptions {
    double margin = 0.025;      // slack inside the 1/5 distance budget
    double group_gap = 0.02;    // minimum level separation inside crossing groups
    double max_window = 0.008;  // rotation window half-width cap
    double wiggle_amp = 0.002;  // sine wiggle on the levels (0 disables)
    bool conjugate = true;      // extra near-identity conjugation
    int grid_size = 641;
};

namespace detail {

// Branch permutation across a crossing: slots sorted by slope descending
// occupy ascending branch positions before the window and the reverse
// order after it, with identical-function slots keeping their relative
// order.  Returned as perm[i] = position after the window of the slot at
// position i before it.
// Group slots are sorted slope-descending, which is ascending branch order
// just before the crossing.  perm[q] answers: the branch at ascending
// position q after the crossing belonged to which pre position?  With that
// orientation both the assignment update sb[slots[perm[q]]] = pre[q] and
// the conjugation by signed_permutation(perm) transport the true geometry,
// including for odd cycles where the permutation is not an involution.
inline std::vector<int> crossing_permutation(const std::vector<SlotFunction>& fns,
                                             const CrossingGroup& g) {
    const size_t k = g.slots.size();
    std::vector<int> after(g.slots.begin(), g.slots.end());
    std::stable_sort(after.begin(), after.end(), [&fns](int a, int b) {
        return fns[static_cast<size_t>(a)].slope < fns[static_cast<size_t>(b)].slope;
    });
    std::vector<int> perm(k);
    for (size_t q = 0; q < k; ++q) {
        const auto it = std::find(g.slots.begin(), g.slots.end(), after[q]);
        perm[q] = static_cast<int>(it - g.slots.begin());
    }
    return perm;
}

// Signed permutation matrix with determinant +1 and no eigenvalue at -1:
// odd cycles stay plain, even cycles get a single sign flip (negacyclic).
inline Mat signed_permutation(const std::vector<int>& perm) {
    const int k = static_cast<int>(perm.size());
    Mat p = Mat::Zero(k, k);
    std::vector<bool> seen(perm.size(), false);
    for (int start = 0; start < k; ++start) {
        if (seen[static_cast<size_t>(start)]) continue;
        std::vector<int> cycle{start};
        seen[static_cast<size_t>(start)] = true;
        for (int cur = perm[static_cast<size_t>(start)]; cur != start;
             cur = perm[static_cast<size_t>(cur)]) {
            cycle.push_back(cur);
            seen[static_cast<size_t>(cur)] = true;
        }
        const bool even = cycle.size() % 2 == 0;
        for (size_t i = 0; i < cycle.size(); ++i) {
            const int from = cycle[i];
            const int to = perm[static_cast<size_t>(from)];
            const bool flip = even && i == 0;
            p(to, from) = flip ? -1.0 : 1.0;
        }
    }
    return p;
}

}  // namespace detail

// A sampled staircase instance together with the bookkeeping the tests
// want to see.
struct ObstructionInstance {
    FiberedElement h;
    std::vector<double> levels;           // per branch
    std::vector<CrossingGroup> groups;    // crossing structure used
    std::vector<double> window_halfwidth; // per group
};

inline ObstructionInstance sample_obstruction_instance(Rng& rng, const HamiltonianLadder& ladder,
                                                       int m,
                                                       const ObstructionSampleOptions& opt = {}) {
    if (opt.grid_size < 64)
        throw std::invalid_argument("sample_obstruction_instance: grid too coarse");
    const std::vector<SlotFunction> fns = slot_functions(ladder, m);
    const int n = static_cast<int>(fns.size());
    const BlockAlgebra& alg = ladder.levels[static_cast<size_t>(m)].algebra;
    if (alg.total_dim() != n)
        throw std::runtime_error("sample_obstruction_instance: slot count mismatch");
    std::vector<CrossingGroup> groups = slot_crossings(fns);

    // Branch ranges from the envelope at the breakpoints (the branches are
    // piecewise linear with kinks only at crossings).
    std::vector<double> knots{0.0, 1.0};
    for (const auto& g : groups) knots.push_back(g.t);
    std::sort(knots.begin(), knots.end());
    std::vector<double> br_lo(static_cast<size_t>(n), 1e300);
    std::vector<double> br_hi(static_cast<size_t>(n), -1e300);
    for (double t : knots) {
        std::vector<double> vals(static_cast<size_t>(n));
        for (int s = 0; s < n; ++s) vals[static_cast<size_t>(s)] = fns[static_cast<size_t>(s)].at(t);
        std::sort(vals.begin(), vals.end());
        for (int p = 0; p < n; ++p) {
            br_lo[static_cast<size_t>(p)] = std::min(br_lo[static_cast<size_t>(p)], vals[static_cast<size_t>(p)]);
            br_hi[static_cast<size_t>(p)] = std::max(br_hi[static_cast<size_t>(p)], vals[static_cast<size_t>(p)]);
        }
    }

    // Feasibility window per branch: stay within 1/5 - margin of the branch
    // everywhere.  Empty windows mean the chain shape cannot support a
    // staircase at this margin; refuse rather than bend the hypothesis.
    const double reach = 0.2 - opt.margin;
    std::vector<std::pair<double, double>> windows;
    windows.reserve(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) {
        // Clamped so a level plus its wiggle still lies inside [0, 1]; the
        // result has to be a positive contraction, not just nearby one.
        const double lo =
            std::max(br_hi[static_cast<size_t>(p)] - reach, opt.wiggle_amp + 1e-6);
        const double hi =
            std::min(br_lo[static_cast<size_t>(p)] + reach, 1.0 - opt.wiggle_amp - 1e-6);
        if (lo >= hi)
            throw std::runtime_error("sample_obstruction_instance: empty feasibility window");
        windows.emplace_back(lo, hi);
    }

    // Slot -> branch assignment in the first region (stable sort by value).
    const double t0 = (groups.empty() ? 1.0 : groups.front().t) * 0.5;
    std::vector<int> order(static_cast<size_t>(n));
    for (int s = 0; s < n; ++s) order[static_cast<size_t>(s)] = s;
    std::stable_sort(order.begin(), order.end(), [&fns, t0](int a, int b) {
        return fns[static_cast<size_t>(a)].at(t0) < fns[static_cast<size_t>(b)].at(t0);
    });
    std::vector<int> slot_branch(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) slot_branch[static_cast<size_t>(order[static_cast<size_t>(p)])] = p;

    // Separation constraints between branches: inside every crossing group
    // the levels of branches carrying genuinely different slot functions
    // must differ by group_gap.  The constraint graph is a function of the
    // chain geometry alone, so collect it once by walking the groups with
    // the evolving slot assignment, then draw levels to satisfy it.  Joint
    // rejection sampling is hopeless here; a deep chain has dozens of
    // simultaneous constraints.
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    {
        std::vector<int> sb = slot_branch;
        for (const CrossingGroup& g : groups) {
            for (size_t i = 0; i < g.slots.size(); ++i)
                for (size_t j = i + 1; j < g.slots.size(); ++j) {
                    const auto& fa = fns[static_cast<size_t>(g.slots[i])];
                    const auto& fb = fns[static_cast<size_t>(g.slots[j])];
                    if (std::abs(fa.slope - fb.slope) < 1e-12 &&
                        std::abs(fa.offset - fb.offset) < 1e-12)
                        continue;  // identical functions, identical windows
                    const int ba = sb[static_cast<size_t>(g.slots[i])];
                    const int bb = sb[static_cast<size_t>(g.slots[j])];
                    auto& la = adj[static_cast<size_t>(ba)];
                    if (std::find(la.begin(), la.end(), bb) == la.end()) {
                        la.push_back(bb);
                        adj[static_cast<size_t>(bb)].push_back(ba);
                    }
                }
            const std::vector<int> perm = detail::crossing_permutation(fns, g);
            std::vector<int> pre(g.slots.size());
            for (size_t i = 0; i < g.slots.size(); ++i)
                pre[i] = sb[static_cast<size_t>(g.slots[i])];
            for (size_t i = 0; i < g.slots.size(); ++i)
                sb[static_cast<size_t>(g.slots[static_cast<size_t>(perm[i])])] = pre[i];
        }
    }

    // Draw levels narrow windows first, carving a group_gap halo around
    // every already-assigned neighbour out of the window.  Dead ends are
    // rare (they need several neighbours crowding one window), so a few
    // redraws suffice; past that the geometry is genuinely too tight.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> draw_order(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) draw_order[static_cast<size_t>(p)] = p;
    std::sort(draw_order.begin(), draw_order.end(), [&windows](int a, int b) {
        const double wa = windows[static_cast<size_t>(a)].second - windows[static_cast<size_t>(a)].first;
        const double wb = windows[static_cast<size_t>(b)].second - windows[static_cast<size_t>(b)].first;
        return wa != wb ? wa < wb : a < b;
    });
    std::vector<double> levels(static_cast<size_t>(n));
    std::vector<char> assigned(static_cast<size_t>(n), 0);
    bool ok = false;
    for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
        std::fill(assigned.begin(), assigned.end(), 0);
        ok = true;
        for (int p : draw_order) {
            const double wlo = windows[static_cast<size_t>(p)].first;
            const double whi = windows[static_cast<size_t>(p)].second;
            std::vector<std::pair<double, double>> ex;
            for (int q : adj[static_cast<size_t>(p)])
                if (assigned[static_cast<size_t>(q)]) {
                    const double lo = std::max(wlo, levels[static_cast<size_t>(q)] - opt.group_gap);
                    const double hi = std::min(whi, levels[static_cast<size_t>(q)] + opt.group_gap);
                    if (lo < hi) ex.emplace_back(lo, hi);
                }
            std::sort(ex.begin(), ex.end());
            std::vector<std::pair<double, double>> merged;
            for (const auto& e : ex) {
                if (!merged.empty() && e.first <= merged.back().second)
                    merged.back().second = std::max(merged.back().second, e.second);
                else
                    merged.push_back(e);
            }
            double free = whi - wlo;
            for (const auto& e : merged) free -= e.second - e.first;
            if (free <= 1e-12) {
                ok = false;
                break;
            }
            // Transport a uniform draw on the free measure through the gaps.
            double u = unif(rng) * free;
            double pos = wlo;
            for (const auto& e : merged) {
                const double seg = e.first - pos;
                if (u <= seg) break;
                u -= seg;
                pos = e.second;
            }
            levels[static_cast<size_t>(p)] = pos + u;
            assigned[static_cast<size_t>(p)] = 1;
        }
    }
    if (!ok)
        throw std::runtime_error("sample_obstruction_instance: could not separate group levels");

    // Rotation window half-widths: clear of neighbouring crossings and the
    // endpoints, and wide enough for the certification grid to sample.
    const double step = 1.0 / (opt.grid_size - 1);
    std::vector<double> halfw(groups.size(), 0.0);
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        double room = std::min(groups[gi].t, 1.0 - groups[gi].t);
        for (size_t gj = 0; gj < groups.size(); ++gj)
            if (std::abs(groups[gj].t - groups[gi].t) > 1e-9)
                room = std::min(room, std::abs(groups[gj].t - groups[gi].t) / 2.0);
        halfw[gi] = std::min(opt.max_window, 0.9 * room);
        if (halfw[gi] < 2.5 * step)
            throw std::runtime_error("sample_obstruction_instance: rotation window underresolved");
    }

    // Rotation generators: Hermitian logs of the signed branch permutations,
    // pre-diagonalized so each fiber costs one small unitary synthesis.
    std::vector<Eigen::VectorXd> gen_phase(groups.size());
    std::vector<Mat> gen_basis(groups.size());
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        const std::vector<int> perm = detail::crossing_permutation(fns, groups[gi]);
        const Mat log = cstar::detail::principal_log_mat(
            detail::signed_permutation(perm).cast<cxd>(), 1e-6);
        Eigen::SelfAdjointEigenSolver<Mat> es(log);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("sample_obstruction_instance: generator eigensolver failed");
        gen_phase[gi] = es.eigenvalues();
        gen_basis[gi] = es.eigenvectors();
    }

    // Wiggle phases, one slow sine per branch.
    std::vector<double> wphase(static_cast<size_t>(n));
    std::vector<int> wfreq(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) {
        wphase[static_cast<size_t>(p)] = 2.0 * std::numbers::pi * unif(rng);
        wfreq[static_cast<size_t>(p)] = 1 + static_cast<int>(3.0 * unif(rng));
    }
    const auto level_at = [&](int branch, double t) {
        return levels[static_cast<size_t>(branch)] +
               opt.wiggle_amp * std::sin(2.0 * std::numbers::pi * wfreq[static_cast<size_t>(branch)] * t +
                                         wphase[static_cast<size_t>(branch)]);
    };

    // Assemble the fibers.
    const FiberSpace space = FiberSpace::make_interval(opt.grid_size);
    std::vector<Element> samples;
    samples.reserve(static_cast<size_t>(space.size()));
    std::vector<int> sb = slot_branch;
    size_t next_group = 0;
    for (int gidx = 0; gidx < space.size(); ++gidx) {
        const double t = space.grid[static_cast<size_t>(gidx)];
        // Bake every window that already closed.
        while (next_group < groups.size() &&
               t > groups[next_group].t + halfw[next_group] + 1e-12) {
            const std::vector<int> perm = detail::crossing_permutation(fns, groups[next_group]);
            std::vector<int> pre(groups[next_group].slots.size());
            for (size_t i = 0; i < pre.size(); ++i)
                pre[i] = sb[static_cast<size_t>(groups[next_group].slots[i])];
            for (size_t i = 0; i < pre.size(); ++i)
                sb[static_cast<size_t>(groups[next_group].slots[static_cast<size_t>(perm[i])])] = pre[i];
            ++next_group;
        }
        Element fiber = Element::zero(alg);
        Mat& bm = fiber.block(0);
        for (int s = 0; s < n; ++s)
            bm(s, s) = level_at(sb[static_cast<size_t>(s)], t);
        // Apply every active rotation window (they never share slots).
        for (size_t gi = next_group; gi < groups.size(); ++gi) {
            if (groups[gi].t - t > opt.max_window + 1e-12) break;  // sorted by t
            if (t < groups[gi].t - halfw[gi] - 1e-12 || t > groups[gi].t + halfw[gi] + 1e-12)
                continue;
            const double s01 =
                (t - (groups[gi].t - halfw[gi])) / (2.0 * halfw[gi]);
            const double smooth = s01 * s01 * (3.0 - 2.0 * s01);
            const int k = static_cast<int>(groups[gi].slots.size());
            Eigen::VectorXcd ph(gen_phase[gi].size());
            for (Eigen::Index e = 0; e < ph.size(); ++e)
                ph(e) = std::exp(cxd(0.0, smooth * gen_phase[gi](e)));
            const Mat r = gen_basis[gi] * ph.asDiagonal() * gen_basis[gi].adjoint();
            Mat d = Mat::Zero(k, k);
            for (int i = 0; i < k; ++i)
                d(i, i) = bm(groups[gi].slots[static_cast<size_t>(i)],
                             groups[gi].slots[static_cast<size_t>(i)]);
            const Mat rot = r * d * r.adjoint();
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    bm(groups[gi].slots[static_cast<size_t>(i)],
                       groups[gi].slots[static_cast<size_t>(j)]) = rot(i, j);
        }
        fiber.certify_self_adjoint(1e-12);
        samples.push_back(std::move(fiber));
    }

    FiberedElement h(space, alg, std::move(samples));
    if (opt.conjugate) {
        Element s = random_hermitian(rng, alg, 0.002);
        const Element w = exp_i(s);
        h = h.map([&w](const Element& fiber) { return w * fiber * w.adjoint(); });
    }
    return ObstructionInstance{std::move(h), std::move(levels), std::move(groups),
                               std::move(halfw)};
}

}  // namespace cstar
