#pragma once

// Ridge and banded ridge solvers. One thin SVD of X serves every penalty:
// W(alpha) = V diag(s / (s^2 + alpha)) U^T Y.

#include "brainalign/common.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace brainalign::encoder {

template <typename Scalar>
class RidgePath {
public:
    template <typename DX, typename DY>
    RidgePath(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y)
    {
        if (X.rows() != Y.rows())
            throw std::invalid_argument("ridge: X and Y row counts differ");
        if (X.rows() < 2)
            throw std::invalid_argument("ridge: need at least 2 samples");
        if (!all_finite(X) || !all_finite(Y))
            throw std::invalid_argument("ridge: non-finite input");
        Eigen::BDCSVD<MatrixX<Scalar>> svd(X.template cast<Scalar>(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        singular_ = svd.singularValues();
        v_ = svd.matrixV();
        uty_ = svd.matrixU().transpose() * Y.template cast<Scalar>();
    }

    const VectorX<Scalar>& singular_values() const { return singular_; }

    /// Spectral shrinkage s / (s^2 + alpha); zero singular values map to 0.
    VectorX<Scalar> shrinkage(Scalar alpha) const
    {
        if (alpha < Scalar(0))
            throw std::invalid_argument("ridge: alpha must be >= 0");
        VectorX<Scalar> d(singular_.size());
        for (Index i = 0; i < singular_.size(); ++i) {
            const Scalar s = singular_(i);
            const Scalar denom = s * s + alpha;
            d(i) = denom > Scalar(0) ? s / denom : Scalar(0);
        }
        return d;
    }

    MatrixX<Scalar> weights(Scalar alpha) const { return v_ * (shrinkage(alpha).asDiagonal() * uty_); }

    /// Rows of X_new projected on V; reuse across alphas with predict().
    template <typename DX>
    MatrixX<Scalar> project(const Eigen::MatrixBase<DX>& x_new) const
    {
        return x_new.template cast<Scalar>() * v_;
    }

    MatrixX<Scalar> predict(const MatrixX<Scalar>& projected, Scalar alpha) const
    {
        return projected * (shrinkage(alpha).asDiagonal() * uty_);
    }

private:
    VectorX<Scalar> singular_;
    MatrixX<Scalar> v_;
    MatrixX<Scalar> uty_;
};

/// argmin ||Y - XW||^2 + alpha ||W||^2 via the SVD of X. alpha = 0 yields the
/// minimum-norm least-squares solution.
template <typename DX, typename DY>
MatrixX<typename DX::Scalar> ridge_fit(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y,
                                       typename DX::Scalar alpha)
{
    return RidgePath<typename DX::Scalar>(X, Y).weights(alpha);
}

/// Half-open column range [begin, end).
struct Band {
    Index begin = 0;
    Index end = 0;

    Index size() const { return end - begin; }
};

inline constexpr std::size_t kMaxBands = 3;

/// Bands must be non-empty, disjoint and together cover [0, columns).
void validate_bands(std::span<const Band> bands, Index columns);

/// Ridge with block penalty diag(alpha_1 I, ..., alpha_k I), solved by scaling
/// band b's columns with 1/sqrt(alpha_b) and running plain ridge at alpha = 1.
template <typename DX, typename DY>
MatrixX<typename DX::Scalar> banded_ridge_fit(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& Y,
                                              std::span<const Band> bands,
                                              std::span<const typename DX::Scalar> penalties)
{
    using Scalar = typename DX::Scalar;
    validate_bands(bands, X.cols());
    if (penalties.size() != bands.size())
        throw std::invalid_argument("banded ridge: one penalty per band required");
    VectorX<Scalar> scale(X.cols());
    for (std::size_t b = 0; b < bands.size(); ++b) {
        if (!(penalties[b] > Scalar(0)))
            throw std::invalid_argument("banded ridge: penalties must be > 0");
        scale.segment(bands[b].begin, bands[b].size()).setConstant(Scalar(1) / std::sqrt(penalties[b]));
    }
    const MatrixX<Scalar> scaled = X * scale.asDiagonal();
    return scale.asDiagonal() * ridge_fit(scaled, Y, Scalar(1));
}

/// Sample Pearson correlation; NaN when either input is constant.
template <typename DA, typename DB>
typename DA::Scalar pearson(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
    using Scalar = typename DA::Scalar;
    if (a.size() != b.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (a.size() < 2)
        throw std::invalid_argument("pearson: need at least 2 samples");
    if (a.maxCoeff() == a.minCoeff() || b.maxCoeff() == b.minCoeff())
        return std::numeric_limits<Scalar>::quiet_NaN();
    const auto ac = (a.array() - a.mean()).eval();
    const auto bc = (b.array() - b.mean()).eval();
    const Scalar denom = std::sqrt(ac.square().sum() * bc.square().sum());
    if (!(denom > Scalar(0)))
        return std::numeric_limits<Scalar>::quiet_NaN();
    const Scalar r = (ac * bc).sum() / denom;
    return std::clamp(r, Scalar(-1), Scalar(1));
}

/// Column-wise Pearson between two matrices of equal shape.
template <typename DA, typename DB>
VectorX<typename DA::Scalar> pearson_columns(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("pearson_columns: shape mismatch");
    VectorX<typename DA::Scalar> r(a.cols());
    for (Index j = 0; j < a.cols(); ++j)
        r(j) = pearson(a.col(j), b.col(j));
    return r;
}

} // namespace brainalign::encoder
