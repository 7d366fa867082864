#include "support.hpp"

#include "brainalign/groupstats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::stats;

namespace {

std::vector<ScoreRow> deterministic_rows()
{
    std::vector<ScoreRow> rows;
    for (int s = 0; s < 6; ++s)
        for (int r = 0; r < 5; ++r)
            for (int m = 0; m < 2; ++m) {
                const double y = 0.3 * m + 0.5 * std::sin(1.7 * s + 0.3) + 0.4 * std::cos(2.3 * r + 1.1) +
                                 0.2 * std::sin(5.1 * s + 3.7 * r + 2.9 * m + 0.5);
                rows.push_back({s, r, m, y});
            }
    return rows;
}

} // namespace

TEST_SUITE("lmm")
{
    TEST_CASE("agrees with an independent REML fit")
    {
        // statsmodels MixedLM, REML, variance components for subject and ROI
        const auto fit = lmm_crossed(deterministic_rows());
        CHECK(fit.converged);
        CHECK(fit.intercept == doctest::Approx(0.06499209).epsilon(1e-5));
        CHECK(fit.estimate == doctest::Approx(0.29830672).epsilon(1e-6));
        CHECK(fit.standard_error == doctest::Approx(0.04072461).epsilon(1e-4));
        CHECK(std::fabs(fit.var_subject - 0.11846137) < 1e-4);
        CHECK(std::fabs(fit.var_roi - 0.08768582) < 1e-4);
        CHECK(std::fabs(fit.var_residual - 0.024877406) < 1e-5);
        CHECK(fit.z == doctest::Approx(fit.estimate / fit.standard_error));
    }

    TEST_CASE("identical models give a zero contrast")
    {
        const Matrix a = testing::gaussian(8, 6, 1);
        const auto fit = lmm_crossed(model_rows(a, a));
        CHECK(std::fabs(fit.estimate) < 1e-10);
        CHECK(fit.p == doctest::Approx(1.0).epsilon(1e-6));
    }

    TEST_CASE("balanced data: contrast equals the OLS difference of means")
    {
        const Matrix a = testing::gaussian(10, 12, 2) + Matrix::Constant(10, 12, 0.4);
        const Matrix b = testing::gaussian(10, 12, 3);
        const auto fit = lmm_crossed(model_rows(a, b));
        CHECK(fit.estimate == doctest::Approx(a.mean() - b.mean()).epsilon(1e-9));
    }

    TEST_CASE("rejects malformed designs")
    {
        std::vector<ScoreRow> rows{{0, 0, 0, 1.0}, {0, 1, 1, 2.0}, {1, 0, 0, 1.5}, {1, 1, 1, 2.5}};
        rows[0].model = 2;
        CHECK_THROWS_AS(lmm_crossed(rows), std::invalid_argument);
        std::vector<ScoreRow> one_level;
        for (int s = 0; s < 3; ++s)
            for (int r = 0; r < 3; ++r)
                one_level.push_back({s, r, 0, 0.1 * s + r});
        CHECK_THROWS_AS(lmm_crossed(one_level), std::invalid_argument);
    }
}
