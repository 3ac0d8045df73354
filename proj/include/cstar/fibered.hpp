/*
 * fibered.hpp
 *
 * Algebras of matrix-valued functions over an interval or a circle,
 * discretized on a fixed sample grid with linear interpolation between
 * fibers.  Provides the canonical generators, the two standard unital
 * embeddings with prescribed multiplicities, and the spectrum measure
 * (total length of the union of the eigenvalue branch ranges).
 *
 * Slot layout contract for the embeddings (other code relies on it):
 * inside target block i the source blocks appear in order j = 0, 1, ...;
 * source block j occupies chi(i,j) consecutive slots of width d_j.
 *   interval, multiplicity m:  slot 0 carries x_j(t), slot l >= 1 carries
 *     x_j((t + l - 1) / (m - 1)).
 *   circle, multiplicity m:  slots 0..1 carry the first companion pair
 *     (width 2 d_j), slots 2..3 the conjugate companion pair, and the
 *     remaining m - 4 slots carry x_j evaluated at angle 0.
 * In particular the leading d_{source,0} coordinates of target block 0
 * always carry the identity-map copy (interval) or the first companion
 * row (circle) of source block 0.
 */
#pragma once

#include "cstar/algebra.hpp"
#include "cstar/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstar {

enum class Base { interval, circle };

struct FiberSpace {
    Base base = Base::interval;
    std::vector<double> grid;

    static FiberSpace make_interval(int n = 129) {
        if (n < 16) throw std::invalid_argument("FiberSpace: need at least 16 samples");
        FiberSpace s;
        s.base = Base::interval;
        s.grid.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) s.grid[static_cast<size_t>(i)] = static_cast<double>(i) / (n - 1);
        return s;
    }

    static FiberSpace make_circle(int n = 128) {
        if (n < 16) throw std::invalid_argument("FiberSpace: need at least 16 samples");
        FiberSpace s;
        s.base = Base::circle;
        s.grid.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            s.grid[static_cast<size_t>(i)] = 2.0 * std::numbers::pi * i / n;
        return s;
    }

    [[nodiscard]] int size() const { return static_cast<int>(grid.size()); }
    [[nodiscard]] double domain_length() const {
        return base == Base::interval ? 1.0 : 2.0 * std::numbers::pi;
    }

    friend bool operator==(const FiberSpace& a, const FiberSpace& b) {
        return a.base == b.base && a.grid == b.grid;
    }
    friend bool operator!=(const FiberSpace& a, const FiberSpace& b) { return !(a == b); }
};

class FiberedElement {
  public:
    FiberedElement() = default;
    FiberedElement(FiberSpace space, BlockAlgebra alg, std::vector<Element> samples)
        : space_(std::move(space)), alg_(std::move(alg)), samples_(std::move(samples)) {
        if (static_cast<int>(samples_.size()) != space_.size())
            throw std::invalid_argument("FiberedElement: one sample per grid point required");
        for (const Element& e : samples_)
            if (e.algebra() != alg_)
                throw std::invalid_argument("FiberedElement: sample algebra mismatch");
    }

    static FiberedElement constant(const FiberSpace& space, const Element& value) {
        std::vector<Element> s(static_cast<size_t>(space.size()), value);
        return FiberedElement(space, value.algebra(), std::move(s));
    }

    template <class F>
    static FiberedElement from_function(const FiberSpace& space, const BlockAlgebra& alg, F&& f) {
        std::vector<Element> s;
        s.reserve(static_cast<size_t>(space.size()));
        for (double t : space.grid) s.push_back(f(t));
        return FiberedElement(space, alg, std::move(s));
    }

    [[nodiscard]] const FiberSpace& space() const { return space_; }
    [[nodiscard]] const BlockAlgebra& algebra() const { return alg_; }
    [[nodiscard]] const Element& sample(int i) const { return samples_.at(static_cast<size_t>(i)); }
    [[nodiscard]] Element& sample(int i) { return samples_.at(static_cast<size_t>(i)); }
    [[nodiscard]] int size() const { return static_cast<int>(samples_.size()); }

    // Linear interpolation between fibers; the circle wraps around.
    [[nodiscard]] Element eval(double t) const {
        const auto& g = space_.grid;
        const int n = space_.size();
        if (space_.base == Base::interval) {
            if (t < g.front() - 1e-12 || t > g.back() + 1e-12)
                throw std::invalid_argument("FiberedElement::eval: point outside the interval");
            t = std::clamp(t, g.front(), g.back());
            const auto it = std::upper_bound(g.begin(), g.end(), t);
            int k = static_cast<int>(it - g.begin()) - 1;
            if (k >= n - 1) k = n - 2;
            const double w = (t - g[static_cast<size_t>(k)]) /
                             (g[static_cast<size_t>(k + 1)] - g[static_cast<size_t>(k)]);
            return lerp(samples_[static_cast<size_t>(k)], samples_[static_cast<size_t>(k + 1)], w);
        }
        const double L = 2.0 * std::numbers::pi;
        double th = std::fmod(t, L);
        if (th < 0) th += L;
        const auto it = std::upper_bound(g.begin(), g.end(), th);
        const int k = static_cast<int>(it - g.begin()) - 1;
        const int k2 = (k + 1) % n;
        const double seg = (k == n - 1 ? L - g.back() + g.front() : g[static_cast<size_t>(k + 1)] - g[static_cast<size_t>(k)]);
        const double w = (th - g[static_cast<size_t>(k)]) / seg;
        return lerp(samples_[static_cast<size_t>(k)], samples_[static_cast<size_t>(k2)], w);
    }

    [[nodiscard]] FiberedElement adjoint() const {
        return map([](const Element& e) { return e.adjoint(); });
    }

    template <class F>
    [[nodiscard]] FiberedElement map(F&& f) const {
        std::vector<Element> s;
        s.reserve(samples_.size());
        for (const Element& e : samples_) s.push_back(f(e));
        BlockAlgebra out_alg = s.front().algebra();  // grab before the move
        return FiberedElement(space_, std::move(out_alg), std::move(s));
    }

    friend FiberedElement operator+(const FiberedElement& a, const FiberedElement& b) {
        check_same(a, b);
        std::vector<Element> s;
        s.reserve(a.samples_.size());
        for (size_t i = 0; i < a.samples_.size(); ++i) s.push_back(a.samples_[i] + b.samples_[i]);
        return FiberedElement(a.space_, a.alg_, std::move(s));
    }
    friend FiberedElement operator-(const FiberedElement& a, const FiberedElement& b) {
        check_same(a, b);
        std::vector<Element> s;
        s.reserve(a.samples_.size());
        for (size_t i = 0; i < a.samples_.size(); ++i) s.push_back(a.samples_[i] - b.samples_[i]);
        return FiberedElement(a.space_, a.alg_, std::move(s));
    }
    friend FiberedElement operator*(const FiberedElement& a, const FiberedElement& b) {
        check_same(a, b);
        std::vector<Element> s;
        s.reserve(a.samples_.size());
        for (size_t i = 0; i < a.samples_.size(); ++i) s.push_back(a.samples_[i] * b.samples_[i]);
        return FiberedElement(a.space_, a.alg_, std::move(s));
    }
    friend FiberedElement operator*(cxd c, const FiberedElement& a) {
        return a.map([c](const Element& e) { return c * e; });
    }

  private:
    static Element lerp(const Element& a, const Element& b, double w) {
        return cxd(1.0 - w, 0.0) * a + cxd(w, 0.0) * b;
    }
    static void check_same(const FiberedElement& a, const FiberedElement& b) {
        if (a.space_ != b.space_ || a.alg_ != b.alg_)
            throw std::invalid_argument("FiberedElement: space or algebra mismatch");
    }

    FiberSpace space_;
    BlockAlgebra alg_;
    std::vector<Element> samples_;
};

inline double sup_norm(const FiberedElement& x) {
    double n = 0.0;
    for (int i = 0; i < x.size(); ++i) n = std::max(n, operator_norm(x.sample(i)));
    return n;
}

// Canonical self-adjoint generator t -> t * 1 of C[0,1] x A.
inline FiberedElement canonical_x(const FiberSpace& space, const BlockAlgebra& alg) {
    if (space.base != Base::interval)
        throw std::invalid_argument("canonical_x: interval base required");
    return FiberedElement::from_function(space, alg, [&alg](double t) {
        Element e = cxd(t, 0.0) * Element::identity(alg);
        e.certify_self_adjoint();
        return e;
    });
}

// Canonical unitary generator theta -> e^{i theta} * 1 of C(T) x A.
inline FiberedElement canonical_z(const FiberSpace& space, const BlockAlgebra& alg) {
    if (space.base != Base::circle)
        throw std::invalid_argument("canonical_z: circle base required");
    return FiberedElement::from_function(space, alg, [&alg](double th) {
        Element e = std::exp(cxd(0.0, th)) * Element::identity(alg);
        e.certify_unitary();
        return e;
    });
}

// Unital embedding data: multiplicity matrix chi(i,j) = number of copies
// of source block j inside target block i.
struct EmbeddingSpec {
    Base base = Base::interval;
    std::vector<std::vector<int>> chi;
    BlockAlgebra source;
    BlockAlgebra target;

    EmbeddingSpec(Base b, std::vector<std::vector<int>> multiplicities, BlockAlgebra src)
        : base(b), chi(std::move(multiplicities)), source(std::move(src)) {
        if (chi.empty()) throw std::invalid_argument("EmbeddingSpec: empty multiplicity matrix");
        const int min_mult = base == Base::interval ? 3 : 4;
        std::vector<int> tdims;
        for (const auto& row : chi) {
            if (static_cast<int>(row.size()) != source.blocks())
                throw std::invalid_argument("EmbeddingSpec: row width must match source blocks");
            int dim = 0;
            for (int j = 0; j < source.blocks(); ++j) {
                if (row[static_cast<size_t>(j)] < min_mult)
                    throw std::invalid_argument(
                        "EmbeddingSpec: multiplicities must be at least " +
                        std::to_string(min_mult) + " for this base");
                dim += row[static_cast<size_t>(j)] * source.dim(j);
            }
            tdims.push_back(dim);
        }
        target = BlockAlgebra(tdims);
    }

    // First slot offset of (target block i, source block j, copy l) in the
    // layout described at the top of the file; for the circle the copy
    // index counts slots of width d_j, with the companions occupying the
    // first four.
    [[nodiscard]] int slot_offset(int i, int j, int copy) const {
        const auto& row = chi.at(static_cast<size_t>(i));
        int off = 0;
        for (int jj = 0; jj < j; ++jj) off += row[static_cast<size_t>(jj)] * source.dim(jj);
        return off + copy * source.dim(j);
    }
};

// Embedding of a constant element: every slot carries the source value
// itself, for either base.  (On the circle the companion pairs collapse:
// P+ (x) a + P- (x) a = 1_2 (x) a.)
inline Element embed_constant(const Element& a, const EmbeddingSpec& spec) {
    if (a.algebra() != spec.source)
        throw std::invalid_argument("embed_constant: source algebra mismatch");
    std::vector<Mat> blocks;
    blocks.reserve(spec.chi.size());
    for (size_t i = 0; i < spec.chi.size(); ++i) {
        Mat bm = Mat::Zero(spec.target.dim(static_cast<int>(i)),
                           spec.target.dim(static_cast<int>(i)));
        int off = 0;
        for (int j = 0; j < spec.source.blocks(); ++j) {
            const int m = spec.chi[i][static_cast<size_t>(j)];
            const int d = spec.source.dim(j);
            for (int l = 0; l < m; ++l) {
                bm.block(off, off, d, d) = a.block(j);
                off += d;
            }
        }
        blocks.push_back(std::move(bm));
    }
    return Element(spec.target, std::move(blocks));
}

// Interval embedding: per (i, j) with multiplicity m, the block
// diag(x_j(t), x_j(t/(m-1)), x_j((t+1)/(m-1)), ..., x_j((t+m-2)/(m-1))).
inline FiberedElement embed_interval(const FiberedElement& x, const EmbeddingSpec& spec) {
    if (spec.base != Base::interval || x.space().base != Base::interval)
        throw std::invalid_argument("embed_interval: interval base required");
    if (x.algebra() != spec.source)
        throw std::invalid_argument("embed_interval: source algebra mismatch");
    const FiberSpace& sp = x.space();
    std::vector<Element> out;
    out.reserve(static_cast<size_t>(sp.size()));
    for (int g = 0; g < sp.size(); ++g) {
        const double t = sp.grid[static_cast<size_t>(g)];
        std::vector<Mat> blocks;
        blocks.reserve(spec.chi.size());
        for (size_t i = 0; i < spec.chi.size(); ++i) {
            Mat bm = Mat::Zero(spec.target.dim(static_cast<int>(i)),
                               spec.target.dim(static_cast<int>(i)));
            int off = 0;
            for (int j = 0; j < spec.source.blocks(); ++j) {
                const int m = spec.chi[i][static_cast<size_t>(j)];
                const int d = spec.source.dim(j);
                bm.block(off, off, d, d) = x.sample(g).block(j);
                off += d;
                for (int l = 0; l + 1 < m; ++l) {
                    const double s = (t + l) / (m - 1);
                    bm.block(off, off, d, d) = x.eval(s).block(j);
                    off += d;
                }
            }
            blocks.push_back(std::move(bm));
        }
        out.emplace_back(spec.target, std::move(blocks));
    }
    return FiberedElement(sp, spec.target, std::move(out));
}

namespace detail {

// Rank-one spectral pair of the companion unitary [[0, z], [1, 0]]:
// eigenvalues +-w with w^2 = z, eigenprojections (1/2) [[1, +-w], [+-conj(w), 1]].
inline Mat companion_projection(cxd w, int sign) {
    Mat p(2, 2);
    const double s = sign >= 0 ? 1.0 : -1.0;
    p << cxd(0.5, 0.0), 0.5 * s * w, 0.5 * s * std::conj(w), cxd(0.5, 0.0);
    return p;
}

inline Mat kron2(const Mat& p, const Mat& x) {
    Mat out(2 * x.rows(), 2 * x.cols());
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            out.block(a * x.rows(), b * x.cols(), x.rows(), x.cols()) = p(a, b) * x;
    return out;
}

}  // namespace detail

// Circle embedding: per (i, j) with multiplicity m, two companion pairs of
// winding +1 and -1 followed by m - 4 copies evaluated at angle 0:
//   P+(th) (x) x(th/2) + P-(th) (x) x(th/2 + pi)   (width 2 d_j)
//   Q+(th) (x) x(-th/2) + Q-(th) (x) x(-th/2 + pi) (width 2 d_j)
//   x(0), ..., x(0)                                 (m - 4 slots)
// with P+-(th) the spectral pair of the companion of z and Q+-(th) that of
// the companion of conj(z).  The assignment is continuous across th = 2 pi
// because advancing th by 2 pi swaps the pair members and the two
// evaluation angles simultaneously.
inline FiberedElement embed_circle(const FiberedElement& x, const EmbeddingSpec& spec) {
    if (spec.base != Base::circle || x.space().base != Base::circle)
        throw std::invalid_argument("embed_circle: circle base required");
    if (x.algebra() != spec.source)
        throw std::invalid_argument("embed_circle: source algebra mismatch");
    const FiberSpace& sp = x.space();
    const double pi = std::numbers::pi;
    std::vector<Element> out;
    out.reserve(static_cast<size_t>(sp.size()));
    for (int g = 0; g < sp.size(); ++g) {
        const double th = sp.grid[static_cast<size_t>(g)];
        const cxd w = std::exp(cxd(0.0, th / 2.0));
        std::vector<Mat> blocks;
        blocks.reserve(spec.chi.size());
        for (size_t i = 0; i < spec.chi.size(); ++i) {
            Mat bm = Mat::Zero(spec.target.dim(static_cast<int>(i)),
                               spec.target.dim(static_cast<int>(i)));
            int off = 0;
            for (int j = 0; j < spec.source.blocks(); ++j) {
                const int m = spec.chi[i][static_cast<size_t>(j)];
                const int d = spec.source.dim(j);
                const Mat xa = x.eval(th / 2.0).block(j);
                const Mat xb = x.eval(th / 2.0 + pi).block(j);
                bm.block(off, off, 2 * d, 2 * d) =
                    detail::kron2(detail::companion_projection(w, +1), xa) +
                    detail::kron2(detail::companion_projection(w, -1), xb);
                off += 2 * d;
                const Mat ya = x.eval(-th / 2.0).block(j);
                const Mat yb = x.eval(-th / 2.0 + pi).block(j);
                bm.block(off, off, 2 * d, 2 * d) =
                    detail::kron2(detail::companion_projection(std::conj(w), +1), ya) +
                    detail::kron2(detail::companion_projection(std::conj(w), -1), yb);
                off += 2 * d;
                const Mat x0 = x.eval(0.0).block(j);
                for (int l = 4; l < m; ++l) {
                    bm.block(off, off, d, d) = x0;
                    off += d;
                }
            }
            blocks.push_back(std::move(bm));
        }
        out.emplace_back(spec.target, std::move(blocks));
    }
    return FiberedElement(sp, spec.target, std::move(out));
}

// Measured multiplicativity defect of an embedding on a pair of elements:
// sup over fibers of || E(xy) - E(x) E(y) ||.  Exact evaluation points hit
// the grid only occasionally, so this decays like 1/N with the grid size.
template <class EmbedFn>
inline double embedding_homomorphism_defect(const FiberedElement& x, const FiberedElement& y,
                                            const EmbeddingSpec& spec, EmbedFn&& embed) {
    const FiberedElement exy = embed(x * y, spec);
    const FiberedElement ex_ey = embed(x, spec) * embed(y, spec);
    return sup_norm(exy - ex_ey);
}

struct SpectrumMeasure {
    double measure = 0.0;
    std::vector<std::pair<double, double>> intervals;      // merged union components
    std::vector<std::pair<double, double>> branch_ranges;  // per ascending branch
};

// Total length of the union of the eigenvalue branch ranges.  Branch i is
// the i-th element of the pooled ascending eigenvalue list of each fiber;
// gaps smaller than merge_tol are considered closed.
inline SpectrumMeasure spectrum_measure(const FiberedElement& h, double merge_tol = 0.0) {
    const int dtot = h.algebra().total_dim();
    std::vector<double> lo(static_cast<size_t>(dtot), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<size_t>(dtot), -std::numeric_limits<double>::infinity());
    for (int g = 0; g < h.size(); ++g) {
        const SpectralData sd = eig_hermitian(h.sample(g), 1e-6);
        std::vector<double> pooled;
        pooled.reserve(static_cast<size_t>(dtot));
        for (const auto& ev : sd.eigenvalues)
            for (Eigen::Index k = 0; k < ev.size(); ++k) pooled.push_back(ev(k));
        std::sort(pooled.begin(), pooled.end());
        for (int i = 0; i < dtot; ++i) {
            lo[static_cast<size_t>(i)] = std::min(lo[static_cast<size_t>(i)], pooled[static_cast<size_t>(i)]);
            hi[static_cast<size_t>(i)] = std::max(hi[static_cast<size_t>(i)], pooled[static_cast<size_t>(i)]);
        }
    }
    SpectrumMeasure out;
    for (int i = 0; i < dtot; ++i) out.branch_ranges.emplace_back(lo[static_cast<size_t>(i)], hi[static_cast<size_t>(i)]);
    std::vector<std::pair<double, double>> iv = out.branch_ranges;
    std::sort(iv.begin(), iv.end());
    for (const auto& [a, b] : iv) {
        if (!out.intervals.empty() && a <= out.intervals.back().second + merge_tol)
            out.intervals.back().second = std::max(out.intervals.back().second, b);
        else
            out.intervals.emplace_back(a, b);
    }
    for (const auto& [a, b] : out.intervals) out.measure += b - a;
    return out;
}

// JSON round-trip for fibered elements (fiber-major, block-major, row-major
// with separate real and imaginary parts).
inline nlohmann::json to_json(const FiberedElement& x) {
    nlohmann::json j;
    j["schema_version"] = "1.0";
    j["base"] = x.space().base == Base::interval ? "interval" : "circle";
    j["grid"] = x.space().grid;
    j["block_dims"] = x.algebra().block_dims;
    nlohmann::json samples = nlohmann::json::array();
    for (int g = 0; g < x.size(); ++g) {
        nlohmann::json fiber = nlohmann::json::array();
        for (int b = 0; b < x.algebra().blocks(); ++b) {
            const Mat& m = x.sample(g).block(b);
            nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
                for (Eigen::Index c = 0; c < m.cols(); ++c) {
                    rr.push_back(m(r, c).real());
                    ri.push_back(m(r, c).imag());
                }
                re.push_back(rr);
                im.push_back(ri);
            }
            fiber.push_back({{"re", re}, {"im", im}});
        }
        samples.push_back(fiber);
    }
    j["samples"] = samples;
    return j;
}

inline FiberedElement fibered_from_json(const nlohmann::json& j) {
    FiberSpace sp;
    sp.base = j.at("base").get<std::string>() == "interval" ? Base::interval : Base::circle;
    sp.grid = j.at("grid").get<std::vector<double>>();
    if (sp.size() < 16) throw std::invalid_argument("fibered_from_json: grid too small");
    const BlockAlgebra alg(j.at("block_dims").get<std::vector<int>>());
    std::vector<Element> samples;
    for (const auto& fiber : j.at("samples")) {
        std::vector<Mat> blocks;
        for (int b = 0; b < alg.blocks(); ++b) {
            const auto& re = fiber.at(static_cast<size_t>(b)).at("re");
            const auto& im = fiber.at(static_cast<size_t>(b)).at("im");
            Mat m(alg.dim(b), alg.dim(b));
            for (int r = 0; r < alg.dim(b); ++r)
                for (int c = 0; c < alg.dim(b); ++c)
                    m(r, c) = cxd(re.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>(),
                                  im.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>());
            blocks.push_back(std::move(m));
        }
        samples.emplace_back(alg, std::move(blocks));
    }
    return FiberedElement(sp, alg, std::move(samples));
}

}  // namespace cstar
