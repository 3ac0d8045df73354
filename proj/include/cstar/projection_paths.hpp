/*
 * projection_paths.hpp
 *
 * Piecewise-exponential unitary paths and the geodesic that conjugates one
 * projection onto another inside a corner.
 *
 * A path is a list of segments (base, G); on its segment the path is
 * u(s) = exp(s G) * base with s in [0, 1] and G skew-adjoint, so the
 * segment has length ||G|| and the whole path has length sum ||G_k||.
 *
 * connect_projections(p, q, corner) rotates q onto p through the
 * principal angles between the two ranges: with orthonormal bases Q_r,
 * P_r and the SVD  Q_r* P_r = W diag(cos theta_i) Y*,  the principal
 * pairs are q_i = Q_r W e_i, p_i = P_r Y e_i, and
 *
 *     A = sum_i theta_i (w_i q_i* - q_i w_i*),
 *     w_i = (p_i - cos(theta_i) q_i) / sin(theta_i),
 *
 * gives exp(A) q exp(-A) = p, acts as the identity on the orthogonal
 * complement of the corner, and has ||A|| = max theta_i <= pi/2.
 */
#pragma once

#include "cstar/algebra.hpp"
#include "cstar/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstar {

struct PathSegment {
    Element base;       // unitary at s = 0
    Element generator;  // skew-adjoint G
    std::string label;

    [[nodiscard]] double length() const { return operator_norm(generator); }
};

// Evaluates one segment at many parameters from a single eigendecomposition
// of K = -iG (Hermitian).
class SegmentSampler {
  public:
    explicit SegmentSampler(const PathSegment& seg)
        : base_(seg.base), sd_(eig_hermitian(cxd(0.0, -1.0) * seg.generator, 1e-6)) {}

    [[nodiscard]] Element at(double s) const {
        Element rot = sd_.apply([s](double l) { return std::exp(cxd(0.0, s * l)); });
        return rot * base_;
    }

  private:
    Element base_;
    SpectralData sd_;
};

class UnitaryPath {
  public:
    UnitaryPath() = default;
    explicit UnitaryPath(std::vector<PathSegment> segs) : segments_(std::move(segs)) {
        if (segments_.empty()) throw std::invalid_argument("UnitaryPath: no segments");
    }

    [[nodiscard]] const std::vector<PathSegment>& segments() const { return segments_; }
    [[nodiscard]] int segment_count() const { return static_cast<int>(segments_.size()); }

    [[nodiscard]] const Element& start() const { return segments_.front().base; }
    [[nodiscard]] Element end() const {
        const PathSegment& s = segments_.back();
        return SegmentSampler(s).at(1.0);
    }

    [[nodiscard]] double total_length() const {
        double l = 0.0;
        for (const auto& s : segments_) l += s.length();
        return l;
    }

    // Largest mismatch between the end of segment k and the base of
    // segment k+1, plus structural defects (base unitarity, generator
    // skewness).  A well-formed path keeps this at roundoff level.
    [[nodiscard]] double structural_defect() const {
        double d = 0.0;
        for (size_t k = 0; k < segments_.size(); ++k) {
            const auto& s = segments_[k];
            d = std::max(d, s.base.unitary_defect());
            d = std::max(d, operator_norm(s.generator + s.generator.adjoint()));
            if (k + 1 < segments_.size()) {
                const Element joint = SegmentSampler(s).at(1.0) - segments_[k + 1].base;
                d = std::max(d, operator_norm(joint));
            }
        }
        return d;
    }

    // Global parameter in [0, 1], segments traversed at equal parameter
    // share regardless of their lengths.
    [[nodiscard]] Element at_global(double t) const {
        if (t < 0.0 || t > 1.0) throw std::invalid_argument("UnitaryPath::at_global: t outside [0,1]");
        const double scaled = t * static_cast<double>(segments_.size());
        int k = static_cast<int>(scaled);
        if (k == segment_count()) --k;
        return SegmentSampler(segments_[static_cast<size_t>(k)]).at(scaled - k);
    }

  private:
    std::vector<PathSegment> segments_;
};

namespace detail {

// Orthonormal basis of the range of a (near-)projection: eigenvectors with
// eigenvalue above 1/2.
inline Mat range_basis(const Mat& p) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.adjoint()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("range_basis: eigensolver failed");
    int r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.5) ++r;
    Mat basis(p.rows(), r);
    int c = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.5) basis.col(c++) = es.eigenvectors().col(i);
    return basis;
}

}  // namespace detail

// Geodesic conjugating q onto p inside the given corner projection:
// the returned single-segment path w(s) = exp(s A) satisfies w(0) = 1,
// w(1) q w(1)* = p, w(s) = 1 on (1 - corner), and length = max principal
// angle <= pi/2.
inline UnitaryPath connect_projections(const Element& p, const Element& q, const Element& corner,
                                       double tol = kFlagTol) {
    if (p.algebra() != q.algebra() || p.algebra() != corner.algebra())
        throw std::invalid_argument("connect_projections: algebra mismatch");
    for (const Element* e : {&p, &q, &corner})
        if (e->projection_defect() > tol)
            throw std::invalid_argument("connect_projections: input is not a projection within tol");
    // Containment p <= corner, q <= corner.
    if (operator_norm(corner * p - p) > tol || operator_norm(corner * q - q) > tol)
        throw std::invalid_argument("connect_projections: projections not dominated by the corner");

    std::vector<Mat> gen;
    gen.reserve(static_cast<size_t>(p.blocks()));
    for (int b = 0; b < p.blocks(); ++b) {
        const Mat Pb = detail::range_basis(p.block(b));
        const Mat Qb = detail::range_basis(q.block(b));
        if (Pb.cols() != Qb.cols())
            throw std::invalid_argument("connect_projections: rank mismatch in block " +
                                        std::to_string(b));
        const int d = p.algebra().dim(b);
        Mat A = Mat::Zero(d, d);
        if (Pb.cols() > 0) {
            Eigen::JacobiSVD<Mat> svd(Qb.adjoint() * Pb, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Mat qt = Qb * svd.matrixU();
            const Mat pt = Pb * svd.matrixV();
            for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
                const double c = std::clamp(svd.singularValues()(i), 0.0, 1.0);
                const double theta = std::acos(c);
                if (theta < 1e-8) continue;  // already aligned, nothing to rotate
                const Eigen::VectorXcd w = (pt.col(i) - c * qt.col(i)) / std::sin(theta);
                A += theta * (w * qt.col(i).adjoint() - qt.col(i) * w.adjoint());
            }
        }
        gen.push_back(std::move(A));
    }
    PathSegment seg{Element::identity(p.algebra()), Element(p.algebra(), std::move(gen)),
                    "projection-geodesic"};
    return UnitaryPath({seg});
}

}  // namespace cstar
