#include "oracles.hpp"
#include "support.hpp"

#include "brainalign/groupstats.hpp"
#include "brainalign/special_functions.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::stats;
using testing::bh_oracle;
using testing::kTCases;

namespace {

double naive_exact_p(const Vector& d, Sidedness side)
{
    const auto n = static_cast<std::size_t>(d.size());
    const double obs = d.sum();
    const double tol = 1e-9 * d.cwiseAbs().sum();
    std::size_t hits = 0;
    for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            t += ((m >> i) & 1U ? -1.0 : 1.0) * d(static_cast<Index>(i));
        hits += side == Sidedness::TwoSided ? std::fabs(t) >= std::fabs(obs) - tol : t >= obs - tol;
    }
    return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

} // namespace

TEST_SUITE("groupstats")
{
    TEST_CASE("t-test against high-precision oracle values")
    {
        for (const auto& c : kTCases) {
            const auto pop = one_sample_t_one_sided(c.x, 0);
            CHECK(pop.t == doctest::Approx(c.t_pop).epsilon(1e-12));
            CHECK(std::fabs(pop.p - c.p_pop) < 1e-10);
            const auto sample = one_sample_t_one_sided(c.x, 1);
            CHECK(sample.t == doctest::Approx(c.t_sample).epsilon(1e-12));
            CHECK(std::fabs(sample.p - c.p_sample) < 1e-10);
        }
    }

    TEST_CASE("t-test degenerate and invariance rules")
    {
        const std::vector<double> pos{0.2, 0.2, 0.2}, neg{-1.0, -1.0}, zero{0.0, 0.0, 0.0};
        CHECK(one_sample_t_one_sided(pos).p == 0.0);
        CHECK(one_sample_t_one_sided(neg).p == 1.0);
        CHECK(one_sample_t_one_sided(zero).p == 0.5);
        CHECK(one_sample_t_one_sided(zero).t == 0.0);
        CHECK_THROWS_AS(one_sample_t_one_sided(std::vector<double>{1.0}), std::invalid_argument);

        const std::vector<double> x{0.3, -0.1, 0.4, 0.2, 0.5};
        std::vector<double> scaled = x;
        for (auto& v : scaled)
            v *= 7.5;
        CHECK(one_sample_t_one_sided(scaled).p == doctest::Approx(one_sample_t_one_sided(x).p).epsilon(1e-12));
    }

    TEST_CASE("Student t tail spot values")
    {
        CHECK(student_t_upper(0.0, 5.0) == doctest::Approx(0.5));
        CHECK(student_t_upper(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12)); // Cauchy
        CHECK(student_t_upper(-1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(normal_upper(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
    }

    TEST_CASE("BH hand example and brute-force oracle")
    {
        const std::vector<double> p{0.01, 0.02, 0.03, 0.04};
        CHECK(bh_fdr(p, 0.05).rejected == std::vector<bool>(4, true));
        CHECK(bh_fdr(std::vector<double>(5, 0.0), 0.05).rejected == std::vector<bool>(5, true));

        brainalign::RandomStream rng(5, 0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> pv(50);
            for (auto& v : pv)
                v = rng.uniform() < 0.3 ? rng.uniform() * 0.01 : rng.uniform();
            CHECK(bh_fdr(pv, 0.05).rejected == bh_oracle(pv, 0.05));
        }
        CHECK_THROWS_AS(bh_fdr(std::vector<double>{1.5}, 0.05), std::invalid_argument);
    }

    TEST_CASE("BH mask is monotone in q and adjusted values agree with the mask")
    {
        brainalign::RandomStream rng(6, 0);
        std::vector<double> pv(300);
        for (auto& v : pv)
            v = std::pow(rng.uniform(), 3.0);
        const auto low = bh_fdr(pv, 0.01), high = bh_fdr(pv, 0.1);
        for (std::size_t i = 0; i < pv.size(); ++i) {
            CHECK((!low.rejected[i] || high.rejected[i]));
            CHECK(high.rejected[i] == (high.adjusted[i] <= 0.1));
        }
    }

    TEST_CASE("sign flip reference cases")
    {
        Matrix d(3, 1);
        d << 1, 2, 3;
        SignFlipOptions o;
        const auto r = signflip_paired(d, o);
        CHECK(r.exact);
        CHECK(r.p(0) == 0.25);
        CHECK(signflip_paired(Matrix::Zero(6, 4), o).p == Vector::Ones(4));

        o.sidedness = Sidedness::Greater;
        CHECK(signflip_paired(d, o).p(0) == 0.125);
        // B = A + 0.1: only the all-positive flip pattern favours A
        const Matrix worse = Matrix::Constant(5, 2, -0.1);
        CHECK(signflip_paired(worse, o).p(0) >= 1.0 - std::pow(2.0, -5));
    }

    TEST_CASE("exact enumeration matches a naive oracle")
    {
        for (Index n : {2, 5, 9, 12, 13}) {
            const Matrix d = testing::gaussian(n, 6, 100 + static_cast<std::uint64_t>(n));
            for (Sidedness side : {Sidedness::TwoSided, Sidedness::Greater}) {
                SignFlipOptions o;
                o.sidedness = side;
                const auto r = signflip_paired(d, o);
                for (Index c = 0; c < d.cols(); ++c)
                    CHECK(r.p(c) == naive_exact_p(d.col(c), side));
            }
        }
    }

    TEST_CASE("exact p values are multiples of 2^-n and invariant to subject order")
    {
        const Matrix d = testing::gaussian(8, 10, 7);
        const auto r = signflip_paired(d, {});
        for (Index c = 0; c < d.cols(); ++c)
            CHECK(r.p(c) * 256.0 == std::round(r.p(c) * 256.0));
        Matrix shuffled = d;
        shuffled.row(0).swap(shuffled.row(7));
        shuffled.row(2).swap(shuffled.row(5));
        CHECK(signflip_paired(shuffled, {}).p == r.p);
    }

    TEST_CASE("Monte Carlo p is reproducible, thread independent and in (0, 1]")
    {
        const Matrix d = testing::gaussian(30, 20, 8);
        SignFlipOptions o;
        o.n_perm = 2000;
        o.seed = 42;
        const auto a = signflip_paired(d, o);
        o.threads = 8;
        const auto b = signflip_paired(d, o);
        CHECK(!a.exact);
        CHECK(a.p == b.p);
        CHECK(a.p.minCoeff() > 0.0);
        CHECK(a.p.maxCoeff() <= 1.0);
        o.n_perm = 50;
        CHECK_THROWS_AS(signflip_paired(d, o), std::invalid_argument);
    }

    TEST_CASE("non-finite differences leave the ROI untested")
    {
        Matrix d = Matrix::Constant(6, 2, 1.0);
        d(2, 1) = std::nan("");
        const auto r = signflip_paired(d, {});
        CHECK(r.p(1) == 1.0);
        CHECK(r.p(0) == 2.0 / 64.0);
    }

    TEST_CASE("layer fractions: identical layers, offsets and symmetry")
    {
        encoder::ScoreTensor t = encoder::ScoreTensor::zeros("x", {"a", "b", "c", "d", "e", "f", "g", "h"},
                                                             {1, 2, 3}, {1, 2, 3}, 100);
        for (std::size_t s = 0; s < 8; ++s)
            for (std::size_t r = 0; r < 100; ++r) {
                const double base = 0.01 * static_cast<double>((s * 37 + r * 11) % 17);
                t.score(s, 0, r) = base;
                t.score(s, 1, r) = base + (r < 50 ? 0.2 : 0.0);
                t.score(s, 2, r) = base;
            }
        SignFlipOptions o;
        const Matrix f = layer_pair_fractions(t, 0.05, o);
        CHECK(f(0, 1) == 0.5);
        CHECK(f(0, 2) == 0.0);
        CHECK(f == f.transpose());
        CHECK(f.diagonal().isZero());
    }

    TEST_CASE("model comparison of identical maps")
    {
        const Matrix a = testing::gaussian(6, 10, 9);
        const auto map = model_compare(a, a, 0.05, {});
        CHECK(map.p == Vector::Ones(10));
        CHECK(map.significant_count() == 0);
        CHECK_THROWS_AS(model_compare(a, Matrix::Zero(5, 10), 0.05, {}), std::invalid_argument);
    }

    TEST_CASE("significance map masks exactly the non-significant ROIs")
    {
        Matrix s = testing::gaussian(20, 30, 10) * 0.1;
        s.leftCols(5).array() += 1.0;
        const auto map = significance_map(s, 0.05);
        for (Index r = 0; r < 30; ++r) {
            CHECK(map.significant[static_cast<std::size_t>(r)] == std::isfinite(map.masked_mean(r)));
            if (r < 5)
                CHECK(map.significant[static_cast<std::size_t>(r)]);
        }
        CHECK(significance_map(Matrix::Zero(5, 8), 0.05).significant_count() == 0);

        const std::string csv = format_statmap_csv(map);
        CHECK(csv.rfind("roi_id,stat,p,q,significant\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
    }
}
