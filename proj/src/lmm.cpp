#include "brainalign/groupstats.hpp"
#include "brainalign/special_functions.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace brainalign::stats {

namespace {

// Penalized least squares at fixed relative standard deviations
// theta = (sigma_subject, sigma_roi) / sigma_residual.
class CrossedModel {
public:
    explicit CrossedModel(std::span<const ScoreRow> rows)
    {
        std::map<int, Index> subject_ids, roi_ids;
        for (const auto& row : rows) {
            subject_ids.emplace(row.subject, 0);
            roi_ids.emplace(row.roi, 0);
            if (row.model != 0 && row.model != 1)
                throw std::invalid_argument("lmm: model must be coded 0 or 1");
            if (!std::isfinite(row.score))
                throw std::invalid_argument("lmm: non-finite score");
        }
        if (subject_ids.size() < 2 || roi_ids.size() < 2)
            throw std::invalid_argument("lmm: need at least 2 subjects and 2 ROIs");
        Index next = 0;
        for (auto& [id, idx] : subject_ids)
            idx = next++;
        n_subject_ = next;
        for (auto& [id, idx] : roi_ids)
            idx = next++;
        q_ = next;

        n_ = static_cast<Index>(rows.size());
        y_.resize(n_);
        model_.resize(n_);
        subject_.resize(n_);
        roi_.resize(n_);
        for (Index i = 0; i < n_; ++i) {
            const auto& row = rows[static_cast<std::size_t>(i)];
            y_(i) = row.score;
            model_(i) = row.model;
            subject_[static_cast<std::size_t>(i)] = subject_ids.at(row.subject);
            roi_[static_cast<std::size_t>(i)] = roi_ids.at(row.roi);
        }
        if (model_.minCoeff() == model_.maxCoeff())
            throw std::invalid_argument("lmm: exactly 2 model levels required");

        ztz_ = Matrix::Zero(q_, q_);
        ztx_ = Matrix::Zero(q_, 2);
        zty_ = Vector::Zero(q_);
        xtx_ = Matrix::Zero(2, 2);
        xty_ = Vector::Zero(2);
        for (Index i = 0; i < n_; ++i) {
            const Index s = subject_[static_cast<std::size_t>(i)];
            const Index r = roi_[static_cast<std::size_t>(i)];
            const double x1 = model_(i);
            ztz_(s, s) += 1.0;
            ztz_(r, r) += 1.0;
            ztz_(s, r) += 1.0;
            ztz_(r, s) += 1.0;
            for (Index z : {s, r}) {
                ztx_(z, 0) += 1.0;
                ztx_(z, 1) += x1;
                zty_(z) += y_(i);
            }
            xtx_(0, 0) += 1.0;
            xtx_(0, 1) += x1;
            xtx_(1, 1) += x1 * x1;
            xty_(0) += y_(i);
            xty_(1) += x1 * y_(i);
        }
        xtx_(1, 0) = xtx_(0, 1);
    }

    struct Solution {
        double deviance = 0.0;
        Vector beta;
        Matrix schur_inverse;
        double sigma2 = 0.0;
    };

    Solution solve(double theta_subject, double theta_roi) const
    {
        Vector lambda(q_);
        lambda.head(n_subject_).setConstant(std::fabs(theta_subject));
        lambda.tail(q_ - n_subject_).setConstant(std::fabs(theta_roi));

        Matrix a = lambda.asDiagonal() * ztz_ * lambda.asDiagonal();
        a.diagonal().array() += 1.0;
        const Eigen::LLT<Matrix> chol(a);
        if (chol.info() != Eigen::Success)
            throw NumericError("lmm: random-effects system not positive definite");
        const auto lower = chol.matrixL();

        const Vector cu = lower.solve(lambda.asDiagonal() * zty_);
        const Matrix rzx = lower.solve(lambda.asDiagonal() * ztx_);
        const Matrix schur = xtx_ - rzx.transpose() * rzx;
        const Eigen::LLT<Matrix> chol_x(schur);
        if (chol_x.info() != Eigen::Success)
            throw NumericError("lmm: singular fixed-effects design");

        Solution out;
        out.beta = chol_x.solve(xty_ - rzx.transpose() * cu);
        const Vector u = chol.matrixU().solve(cu - rzx * out.beta);
        const Vector b = lambda.asDiagonal() * u;

        double rss = 0.0;
        for (Index i = 0; i < n_; ++i) {
            const double fitted = out.beta(0) + out.beta(1) * model_(i) + b(subject_[static_cast<std::size_t>(i)]) +
                                  b(roi_[static_cast<std::size_t>(i)]);
            rss += (y_(i) - fitted) * (y_(i) - fitted);
        }
        const double pwrss = rss + u.squaredNorm();
        const double dof = static_cast<double>(n_ - 2);

        double log_det = 0.0;
        for (Index i = 0; i < q_; ++i)
            log_det += 2.0 * std::log(chol.matrixLLT()(i, i));
        for (Index i = 0; i < 2; ++i)
            log_det += 2.0 * std::log(chol_x.matrixLLT()(i, i));

        out.sigma2 = pwrss / dof;
        out.deviance = log_det + dof * (1.0 + std::log(2.0 * std::numbers::pi * out.sigma2));
        out.schur_inverse = chol_x.solve(Matrix::Identity(2, 2));
        return out;
    }

    Index n() const { return n_; }

private:
    Index n_ = 0;
    Index q_ = 0;
    Index n_subject_ = 0;
    Vector y_;
    Vector model_;
    std::vector<Index> subject_;
    std::vector<Index> roi_;
    Matrix ztz_, ztx_, xtx_;
    Vector zty_, xty_;
};

struct Vertex {
    std::array<double, 2> x;
    double f;
};

} // namespace

LmmFit lmm_crossed(std::span<const ScoreRow> rows, const LmmOptions& options)
{
    const CrossedModel model(rows);
    if (model.n() <= 2)
        throw std::invalid_argument("lmm: not enough observations");

    auto objective = [&](const std::array<double, 2>& x) { return model.solve(x[0], x[1]).deviance; };

    // Nelder-Mead over theta; the deviance is even in each coordinate.
    std::array<Vertex, 3> simplex{{{{1.0, 1.0}, 0.0}, {{1.5, 1.0}, 0.0}, {{1.0, 1.5}, 0.0}}};
    for (auto& v : simplex)
        v.f = objective(v.x);

    LmmFit fit;
    const double tol = options.tolerance;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        fit.iterations = iter;

        double x_spread = 0.0;
        for (std::size_t v = 1; v < 3; ++v)
            for (std::size_t k = 0; k < 2; ++k)
                x_spread = std::max(x_spread, std::fabs(simplex[v].x[k] - simplex[0].x[k]) /
                                                  (1.0 + std::fabs(simplex[0].x[k])));
        const double f_spread = (simplex[2].f - simplex[0].f) / (1.0 + std::fabs(simplex[0].f));
        if (x_spread <= tol && f_spread <= tol) {
            fit.converged = true;
            break;
        }

        std::array<double, 2> centroid{};
        for (std::size_t k = 0; k < 2; ++k)
            centroid[k] = 0.5 * (simplex[0].x[k] + simplex[1].x[k]);
        auto along = [&](double t) {
            std::array<double, 2> p{};
            for (std::size_t k = 0; k < 2; ++k)
                p[k] = centroid[k] + t * (simplex[2].x[k] - centroid[k]);
            return Vertex{p, objective(p)};
        };

        const Vertex reflected = along(-1.0);
        if (reflected.f < simplex[0].f) {
            const Vertex expanded = along(-2.0);
            simplex[2] = expanded.f < reflected.f ? expanded : reflected;
        } else if (reflected.f < simplex[1].f) {
            simplex[2] = reflected;
        } else {
            const Vertex contracted = reflected.f < simplex[2].f ? along(-0.5) : along(0.5);
            if (contracted.f < std::min(reflected.f, simplex[2].f)) {
                simplex[2] = contracted;
            } else {
                for (std::size_t v = 1; v < 3; ++v) {
                    for (std::size_t k = 0; k < 2; ++k)
                        simplex[v].x[k] = simplex[0].x[k] + 0.5 * (simplex[v].x[k] - simplex[0].x[k]);
                    simplex[v].f = objective(simplex[v].x);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });

    const auto& best = simplex[0].x;
    const auto solution = model.solve(best[0], best[1]);
    fit.intercept = solution.beta(0);
    fit.estimate = solution.beta(1);
    fit.var_residual = solution.sigma2;
    fit.var_subject = best[0] * best[0] * solution.sigma2;
    fit.var_roi = best[1] * best[1] * solution.sigma2;
    fit.standard_error = std::sqrt(solution.sigma2 * solution.schur_inverse(1, 1));
    fit.z = fit.estimate / fit.standard_error;
    fit.p = std::min(1.0, 2.0 * normal_upper(std::fabs(fit.z)));
    fit.reml_deviance = solution.deviance;
    return fit;
}

} // namespace brainalign::stats
