#pragma once

#include "brainalign/common.hpp"
#include "brainalign/manifest.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace brainalign::design {

/// Oversampling period of the impulse grid (50 Hz).
inline constexpr double kGridPeriod = 0.02;
inline constexpr double kDefaultSupport = 32.0;

/// Unnormalized canonical double gamma: g(t;6,1) - g(t;16,1)/6.
double double_gamma(double t);

/// Double-gamma HRF sampled on [0, support], scaled to a unit peak.
struct HrfKernel {
    double sample_period = kGridPeriod;
    double support = kDefaultSupport;
    Vector samples;

    Index peak_index() const;
};

/// Requires 0 < sample_period <= 0.1 and support >= 24.
HrfKernel hrf_kernel(double sample_period = kGridPeriod, double support = kDefaultSupport);

struct DesignMatrix {
    Matrix values; ///< TR x feature
    int run_id = 0;
    int layer = 0;
};

/// TR x word weights W such that design = W * features: each word is a unit
/// impulse on the kernel's grid, convolved with the kernel and sampled at
/// t = k * tr. Onsets must lie in [0, n_tr * tr).
Matrix impulse_response_weights(std::span<const double> onsets, double tr, std::size_t n_tr,
                                const HrfKernel& kernel);

/// HRF-convolved design for one run; features has one row per onset.
Matrix build_design(const Eigen::Ref<const Matrix>& features, std::span<const double> onsets, double tr,
                    std::size_t n_tr, const HrfKernel& kernel);

/// Overload taking the run's word records; row i of `features` belongs to words[i].
Matrix build_design(const Eigen::Ref<const Matrix>& features, std::span<const io::WordRecord> words, double tr,
                    std::size_t n_tr, const HrfKernel& kernel);

/// Per-run designs of one layer (1-based) for a loaded dataset.
std::vector<DesignMatrix> dataset_designs(const io::Dataset& dataset, int layer, const HrfKernel& kernel);

/// Columns with train sd below this are zeroed in every split.
inline constexpr double kDegenerateSd = 1e-12;

template <typename Scalar>
struct ColumnStats {
    VectorX<Scalar> mean;
    VectorX<Scalar> sd; ///< population sd

    template <typename Derived>
    MatrixX<Scalar> apply(const Eigen::MatrixBase<Derived>& rows) const
    {
        MatrixX<Scalar> out(rows.rows(), rows.cols());
        for (Index j = 0; j < rows.cols(); ++j) {
            if (sd(j) < Scalar(kDegenerateSd))
                out.col(j).setZero();
            else
                out.col(j) = (rows.col(j).array() - mean(j)) / sd(j);
        }
        return out;
    }
};

template <typename Derived>
ColumnStats<typename Derived::Scalar> fit_column_stats(const Eigen::MatrixBase<Derived>& train)
{
    using Scalar = typename Derived::Scalar;
    if (train.rows() < 2)
        throw std::invalid_argument("fit_column_stats: train split needs at least 2 rows");
    ColumnStats<Scalar> stats;
    const Scalar n = static_cast<Scalar>(train.rows());
    stats.mean = train.colwise().sum().transpose() / n;
    stats.sd.resize(train.cols());
    for (Index j = 0; j < train.cols(); ++j)
        stats.sd(j) = std::sqrt((train.col(j).array() - stats.mean(j)).square().sum() / n);
    return stats;
}

template <typename Scalar>
struct ZScored {
    MatrixX<Scalar> train;
    MatrixX<Scalar> applied;
    ColumnStats<Scalar> stats;
};

/// Per-column (x - mean) / sd using statistics of `train` only.
template <typename DerivedA, typename DerivedB>
ZScored<typename DerivedA::Scalar> fit_apply_zscore(const Eigen::MatrixBase<DerivedA>& train,
                                                    const Eigen::MatrixBase<DerivedB>& apply_to)
{
    if (train.cols() != apply_to.cols())
        throw std::invalid_argument("fit_apply_zscore: column count mismatch");
    ZScored<typename DerivedA::Scalar> out;
    out.stats = fit_column_stats(train);
    out.train = out.stats.apply(train);
    out.applied = out.stats.apply(apply_to);
    return out;
}

} // namespace brainalign::design
