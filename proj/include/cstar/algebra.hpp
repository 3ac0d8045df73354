/*
 * algebra.hpp
 *
 * Finite-dimensional C*-algebras realized as block-diagonal complex matrix
 * algebras.  A BlockAlgebra is an ordered list of block dimensions; an
 * Element stores one dense complex matrix per block.  All norms are
 * operator norms (largest singular value), computed blockwise.
 */
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstar {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Certification threshold used by the structural flags on Element.
inline constexpr double kFlagTol = 1e-8;

struct BlockAlgebra {
    std::vector<int> block_dims;

    BlockAlgebra() = default;
    explicit BlockAlgebra(std::vector<int> dims) : block_dims(std::move(dims)) {
        if (block_dims.empty())
            throw std::invalid_argument("BlockAlgebra: needs at least one block");
        for (int d : block_dims)
            if (d < 1)
                throw std::invalid_argument("BlockAlgebra: block dimensions must be positive");
    }

    [[nodiscard]] int blocks() const { return static_cast<int>(block_dims.size()); }
    [[nodiscard]] int dim(int b) const { return block_dims.at(static_cast<size_t>(b)); }
    [[nodiscard]] int total_dim() const {
        int t = 0;
        for (int d : block_dims) t += d;
        return t;
    }

    friend bool operator==(const BlockAlgebra& a, const BlockAlgebra& b) {
        return a.block_dims == b.block_dims;
    }
    friend bool operator!=(const BlockAlgebra& a, const BlockAlgebra& b) { return !(a == b); }
};

// Structural flags.  A set flag is a certificate: it is only set after the
// defining property has been checked numerically (tolerance kFlagTol), and
// every arithmetic operation clears flags it cannot preserve.
struct ElementFlags {
    bool self_adjoint = false;
    bool unitary = false;
    bool projection = false;
};

class Element {
  public:
    Element() = default;

    Element(BlockAlgebra alg, std::vector<Mat> blocks)
        : alg_(std::move(alg)), blocks_(std::move(blocks)) {
        if (static_cast<int>(blocks_.size()) != alg_.blocks())
            throw std::invalid_argument("Element: block count mismatch");
        for (int b = 0; b < alg_.blocks(); ++b) {
            if (blocks_[static_cast<size_t>(b)].rows() != alg_.dim(b) ||
                blocks_[static_cast<size_t>(b)].cols() != alg_.dim(b))
                throw std::invalid_argument("Element: block " + std::to_string(b) +
                                            " has wrong shape");
        }
    }

    static Element zero(const BlockAlgebra& alg) {
        std::vector<Mat> bl;
        bl.reserve(static_cast<size_t>(alg.blocks()));
        for (int b = 0; b < alg.blocks(); ++b) bl.push_back(Mat::Zero(alg.dim(b), alg.dim(b)));
        Element e(alg, std::move(bl));
        e.flags_.self_adjoint = true;
        return e;
    }

    static Element identity(const BlockAlgebra& alg) {
        std::vector<Mat> bl;
        bl.reserve(static_cast<size_t>(alg.blocks()));
        for (int b = 0; b < alg.blocks(); ++b) bl.push_back(Mat::Identity(alg.dim(b), alg.dim(b)));
        Element e(alg, std::move(bl));
        e.flags_.self_adjoint = true;
        e.flags_.unitary = true;
        e.flags_.projection = true;
        return e;
    }

    [[nodiscard]] const BlockAlgebra& algebra() const { return alg_; }
    [[nodiscard]] const Mat& block(int b) const { return blocks_.at(static_cast<size_t>(b)); }
    [[nodiscard]] Mat& block(int b) {
        flags_ = {};
        return blocks_.at(static_cast<size_t>(b));
    }
    [[nodiscard]] int blocks() const { return alg_.blocks(); }
    [[nodiscard]] const ElementFlags& flags() const { return flags_; }

    // Measured defects from the structural properties.
    [[nodiscard]] double self_adjoint_defect() const {
        double d = 0;
        for (const Mat& m : blocks_) d = std::max(d, (m - m.adjoint()).norm());
        return d;
    }
    [[nodiscard]] double unitary_defect() const {
        double d = 0;
        for (const Mat& m : blocks_) {
            const Mat g = m.adjoint() * m - Mat::Identity(m.rows(), m.cols());
            d = std::max(d, g.norm());
        }
        return d;
    }
    [[nodiscard]] double projection_defect() const {
        double d = self_adjoint_defect();
        for (const Mat& m : blocks_) d = std::max(d, (m * m - m).norm());
        return d;
    }

    // Certify-and-set.  Returns whether the property held within tol.
    bool certify_self_adjoint(double tol = kFlagTol) {
        flags_.self_adjoint = self_adjoint_defect() <= tol;
        return flags_.self_adjoint;
    }
    bool certify_unitary(double tol = kFlagTol) {
        flags_.unitary = unitary_defect() <= tol;
        return flags_.unitary;
    }
    bool certify_projection(double tol = kFlagTol) {
        flags_.projection = projection_defect() <= tol;
        if (flags_.projection) flags_.self_adjoint = true;
        return flags_.projection;
    }

    [[nodiscard]] Element adjoint() const {
        std::vector<Mat> bl;
        bl.reserve(blocks_.size());
        for (const Mat& m : blocks_) bl.push_back(m.adjoint());
        Element e(alg_, std::move(bl));
        e.flags_ = flags_;  // all three properties are *-invariant
        return e;
    }

    friend Element operator+(const Element& a, const Element& b) {
        check_same(a, b, "operator+");
        std::vector<Mat> bl;
        bl.reserve(a.blocks_.size());
        for (size_t i = 0; i < a.blocks_.size(); ++i) bl.push_back(a.blocks_[i] + b.blocks_[i]);
        Element e(a.alg_, std::move(bl));
        e.flags_.self_adjoint = a.flags_.self_adjoint && b.flags_.self_adjoint;
        return e;
    }
    friend Element operator-(const Element& a, const Element& b) {
        check_same(a, b, "operator-");
        std::vector<Mat> bl;
        bl.reserve(a.blocks_.size());
        for (size_t i = 0; i < a.blocks_.size(); ++i) bl.push_back(a.blocks_[i] - b.blocks_[i]);
        Element e(a.alg_, std::move(bl));
        e.flags_.self_adjoint = a.flags_.self_adjoint && b.flags_.self_adjoint;
        return e;
    }
    friend Element operator*(const Element& a, const Element& b) {
        check_same(a, b, "operator*");
        std::vector<Mat> bl;
        bl.reserve(a.blocks_.size());
        for (size_t i = 0; i < a.blocks_.size(); ++i) bl.push_back(a.blocks_[i] * b.blocks_[i]);
        Element e(a.alg_, std::move(bl));
        e.flags_.unitary = a.flags_.unitary && b.flags_.unitary;
        return e;
    }
    friend Element operator*(cxd s, const Element& a) {
        std::vector<Mat> bl;
        bl.reserve(a.blocks_.size());
        for (const Mat& m : a.blocks_) bl.push_back(s * m);
        Element e(a.alg_, std::move(bl));
        e.flags_.self_adjoint = a.flags_.self_adjoint && s.imag() == 0.0;
        return e;
    }
    friend Element operator*(const Element& a, cxd s) { return s * a; }
    friend Element operator-(const Element& a) { return cxd(-1.0, 0.0) * a; }

    Element& operator+=(const Element& b) { return *this = *this + b; }
    Element& operator-=(const Element& b) { return *this = *this - b; }
    Element& operator*=(const Element& b) { return *this = *this * b; }

  private:
    static void check_same(const Element& a, const Element& b, const char* op) {
        if (a.alg_ != b.alg_)
            throw std::invalid_argument(std::string(op) + ": elements live in different algebras");
    }

    BlockAlgebra alg_;
    std::vector<Mat> blocks_;
    ElementFlags flags_;
};

// Operator norm of a single matrix.  We take the square root of the top
// eigenvalue of m*m (self-adjoint, PSD); for the modest block sizes used
// here this is faster and no less accurate than a full SVD.
inline double operator_norm(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.compute(m.adjoint() * m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("operator_norm: eigenvalue iteration failed");
    const double top = es.eigenvalues().maxCoeff();
    return top <= 0.0 ? 0.0 : std::sqrt(top);
}

inline double operator_norm(const Element& x) {
    double n = 0.0;
    for (int b = 0; b < x.blocks(); ++b) n = std::max(n, operator_norm(x.block(b)));
    return n;
}

inline Element commutator(const Element& a, const Element& b) { return a * b - b * a; }

// Frobenius norm over all blocks; an upper bound for the operator norm,
// useful to skip exact norm computations in tight sampling loops.
inline double frobenius_norm(const Element& x) {
    double sq = 0.0;
    for (int b = 0; b < x.blocks(); ++b) sq += x.block(b).squaredNorm();
    return std::sqrt(sq);
}

// Norm of the 2x2 operator matrix [[x, dx], [0, x]] acting on H + H.
// Dominates both ||x|| and ||dx||/2 and is submultiplicative for the
// pairs (x, dx), (y, dy) |-> (xy, x dy + dx y).
inline double graph_norm(const Element& x, const Element& dx) {
    if (x.algebra() != dx.algebra())
        throw std::invalid_argument("graph_norm: elements live in different algebras");
    double n = 0.0;
    for (int b = 0; b < x.blocks(); ++b) {
        const int d = x.algebra().dim(b);
        Mat big = Mat::Zero(2 * d, 2 * d);
        big.topLeftCorner(d, d) = x.block(b);
        big.topRightCorner(d, d) = dx.block(b);
        big.bottomRightCorner(d, d) = x.block(b);
        n = std::max(n, operator_norm(big));
    }
    return n;
}

}  // namespace cstar
