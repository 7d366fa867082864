#include "support.hpp"

#include "brainalign/design.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::design;

TEST_SUITE("design")
{
    TEST_CASE("double gamma matches reference values")
    {
        // scipy.stats.gamma.pdf(t, 6) - gamma.pdf(t, 16) / 6
        const std::pair<double, double> ref[] = {{0.5, 0.00015795069263349604}, {2.0, 0.036089408297886365},
                                                 {5.0, 0.17544116219546385},    {10.0, 0.03204692986362342},
                                                 {15.0, -0.015136856322163364}, {25.0, -0.0016473632276457306}};
        for (auto [t, v] : ref)
            CHECK(double_gamma(t) == doctest::Approx(v).epsilon(1e-12));
        CHECK(double_gamma(0.0) == 0.0);
        CHECK(double_gamma(-1.0) == 0.0);
    }

    TEST_CASE("kernel is peak normalised near five seconds")
    {
        const auto k = hrf_kernel();
        CHECK(k.samples.size() == 1601);
        CHECK(k.samples.maxCoeff() == doctest::Approx(1.0));
        // continuous peak of the canonical double gamma is at 4.9985 s
        CHECK(std::fabs(static_cast<double>(k.peak_index()) * k.sample_period - 4.9985) <= k.sample_period);
        CHECK_THROWS_AS(hrf_kernel(0.5), std::invalid_argument);
        CHECK_THROWS_AS(hrf_kernel(0.02, 10.0), std::invalid_argument);
    }

    TEST_CASE("single impulse samples the kernel at TR multiples")
    {
        const auto k = hrf_kernel();
        const std::vector<double> onsets{0.0};
        const Matrix w = impulse_response_weights(onsets, 2.0, 20, k);
        for (Index t = 0; t < 17; ++t)
            CHECK(w(t, 0) == k.samples(100 * t));
        CHECK(w(17, 0) == 0.0);
    }

    TEST_CASE("superposition: design of a union of words is the sum of designs")
    {
        const auto k = hrf_kernel();
        const std::vector<double> a{0.3, 4.1, 9.87, 15.0}, b{1.0, 2.02, 30.5};
        const Matrix fa = testing::gaussian(4, 3, 7), fb = testing::gaussian(3, 3, 8);
        std::vector<double> both = a;
        both.insert(both.end(), b.begin(), b.end());
        Matrix fab(7, 3);
        fab << fa, fb;
        const Matrix joint = build_design(fab, both, 1.5, 30, k);
        const Matrix split = build_design(fa, a, 1.5, 30, k) + build_design(fb, b, 1.5, 30, k);
        CHECK((joint - split).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("design is linear in the features")
    {
        const auto k = hrf_kernel();
        const std::vector<double> onsets{0.7, 3.3, 8.1, 12.9, 20.0};
        const Matrix f1 = testing::gaussian(5, 2, 1), f2 = testing::gaussian(5, 2, 2);
        const Matrix lhs = build_design(2.0 * f1 - 3.0 * f2, onsets, 2.0, 16, k);
        const Matrix rhs = 2.0 * build_design(f1, onsets, 2.0, 16, k) - 3.0 * build_design(f2, onsets, 2.0, 16, k);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("delaying an onset by one TR delays the response by one row")
    {
        const auto k = hrf_kernel();
        const Matrix f = Matrix::Ones(1, 1);
        const std::vector<double> early{1.0}, late{3.0};
        const Matrix d0 = build_design(f, early, 2.0, 20, k);
        const Matrix d1 = build_design(f, late, 2.0, 20, k);
        for (Index t = 1; t < 20; ++t)
            CHECK(d1(t, 0) == d0(t - 1, 0));
    }

    TEST_CASE("onsets outside the run are rejected")
    {
        const auto k = hrf_kernel();
        const Matrix f = Matrix::Ones(1, 1);
        const std::vector<double> late{40.0}, negative{-0.1};
        CHECK_THROWS_AS(build_design(f, late, 2.0, 20, k), std::invalid_argument);
        CHECK_THROWS_AS(build_design(f, negative, 2.0, 20, k), std::invalid_argument);
    }

    TEST_CASE("z-scoring uses training rows only and zeroes constant columns")
    {
        Matrix train = testing::gaussian(30, 3, 4);
        train.col(2).setConstant(5.0);
        Matrix test = testing::gaussian(10, 3, 5);
        const auto z = fit_apply_zscore(train, test);
        CHECK(z.train.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::sqrt(z.train.col(1).array().square().mean()) == doctest::Approx(1.0));
        CHECK(z.train.col(2).isZero());
        CHECK(z.applied.col(2).isZero());

        // leak check: changing held-out rows leaves the training transform untouched
        Matrix test2 = test;
        test2.array() += 100.0;
        const auto z2 = fit_apply_zscore(train, test2);
        CHECK(z2.train == z.train);
        CHECK(z2.stats.mean == z.stats.mean);
        CHECK(z2.stats.sd == z.stats.sd);
        CHECK_THROWS_AS(fit_column_stats(Matrix::Ones(1, 2)), std::invalid_argument);
    }
}
