#include "support.hpp"

#include "brainalign/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::geometry;

namespace {

Matrix uniform(Index n, Index d, std::uint64_t seed)
{
    brainalign::RandomStream rng(seed, 1);
    Matrix m(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j)
            m(i, j) = rng.uniform();
    return m;
}

// O(N^2) oracle for the squared first and second neighbour distances.
std::pair<double, double> brute_neighbors(const Matrix& p, Index i)
{
    double d1 = INFINITY, d2 = INFINITY;
    for (Index j = 0; j < p.rows(); ++j) {
        if (j == i)
            continue;
        double s = 0.0;
        for (Index k = 0; k < p.cols(); ++k)
            s += (p(i, k) - p(j, k)) * (p(i, k) - p(j, k));
        if (s < d1) {
            d2 = d1;
            d1 = s;
        } else if (s < d2) {
            d2 = s;
        }
    }
    return {d1, d2};
}

} // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("kd-tree is exact against brute force")
    {
        for (Index d : {1, 2, 5, 16}) {
            const Matrix p = testing::gaussian(400, d, static_cast<std::uint64_t>(d));
            const KdTree tree(p, 8);
            for (Index i = 0; i < p.rows(); ++i) {
                const auto nb = tree.query(i);
                const auto [d1, d2] = brute_neighbors(p, i);
                CHECK(nb.d1 == d1);
                CHECK(nb.d2 == d2);
            }
        }
    }

    TEST_CASE("both neighbour searches give bit-identical ratios")
    {
        Matrix p = uniform(600, 3, 9);
        p.row(10) = p.row(11); // duplicate pair
        const auto a = two_nn_ratios(p, NeighborSearch::KdTree);
        const auto b = two_nn_ratios(p, NeighborSearch::BruteForce);
        CHECK(a.mu == b.mu);
        CHECK(a.kept == b.kept);
        CHECK(a.duplicates_removed == 2);
        CHECK(a.size() == 598);
    }

    TEST_CASE("ties along a lattice are handled exactly")
    {
        Matrix grid(100, 2);
        for (Index i = 0; i < 100; ++i)
            grid.row(i) << static_cast<double>(i % 10), static_cast<double>(i / 10);
        const auto a = two_nn_ratios(grid, NeighborSearch::KdTree);
        const auto b = two_nn_ratios(grid, NeighborSearch::BruteForce);
        CHECK(a.mu == b.mu);
        CHECK(a.mu.maxCoeff() == 1.0);
    }

    TEST_CASE("ID of simple manifolds")
    {
        CHECK(two_nn_id(uniform(3000, 2, 1)).id == doctest::Approx(2.0).epsilon(0.1));
        const Matrix t = uniform(3000, 1, 2);
        Matrix line(3000, 5);
        for (Index i = 0; i < 3000; ++i)
            line.row(i) << t(i), 2.0 * t(i), -t(i), 0.5 * t(i), 3.0;
        CHECK(two_nn_id(line).id == doctest::Approx(1.0).epsilon(0.1));
    }

    TEST_CASE("L2 normalisation drops zero rows and keeps directions")
    {
        Matrix p(4, 3);
        p << 3, 0, 4, 0, 0, 0, 1, 1, 1, -2, 0, 0;
        const auto n = l2_normalize_rows(p);
        CHECK(n.dropped == 1);
        CHECK(n.kept == std::vector<std::size_t>{0, 2, 3});
        CHECK(n.points.rowwise().norm().isApproxToConstant(1.0, 1e-15));
        CHECK(n.points(0, 2) == doctest::Approx(0.8));
    }

    TEST_CASE("subsampling is seeded, sorted and without replacement")
    {
        const auto a = subsample_rows(1000, 100, 7);
        const auto b = subsample_rows(1000, 100, 7);
        const auto c = subsample_rows(1000, 100, 8);
        CHECK(a == b);
        CHECK(a != c);
        CHECK(std::is_sorted(a.begin(), a.end()));
        CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
        CHECK(subsample_rows(50, 100, 1).size() == 50);
    }

    TEST_CASE("per-group estimates do not depend on threads")
    {
        const Matrix p = uniform(900, 3, 4);
        std::vector<int> groups(900);
        for (std::size_t i = 0; i < 900; ++i)
            groups[i] = static_cast<int>(i % 3) + 1;
        const auto one = id_per_group(p, groups, 200, 5, 1);
        const auto many = id_per_group(p, groups, 200, 5, 4);
        REQUIRE(one.size() == 3);
        for (std::size_t g = 0; g < 3; ++g) {
            CHECK(one[g].group == static_cast<int>(g) + 1);
            CHECK(one[g].estimate.id == many[g].estimate.id);
            CHECK(one[g].estimate.n_used == 200);
        }
    }

    TEST_CASE("degenerate inputs")
    {
        CHECK_THROWS_AS(two_nn_id(Matrix::Zero(2, 3)), std::invalid_argument);
        CHECK_THROWS_AS(two_nn_id(Matrix::Zero(10, 3)), NumericError);
    }
}
