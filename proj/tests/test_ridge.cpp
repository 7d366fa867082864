#include "support.hpp"

#include "brainalign/ridge.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::encoder;

TEST_SUITE("ridge")
{
    TEST_CASE("alpha = 0 matches the normal equations")
    {
        const Matrix X = testing::gaussian(60, 10, 1), Y = testing::gaussian(60, 4, 2);
        const Matrix oracle = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
        CHECK((ridge_fit(X, Y, 0.0) - oracle).cwiseAbs().maxCoeff() < 1e-10);
    }

    TEST_CASE("positive alpha matches the regularised normal equations")
    {
        const Matrix X = testing::gaussian(40, 8, 3), Y = testing::gaussian(40, 3, 4);
        for (double alpha : {0.1, 1.0, 25.0, 1e4}) {
            const Matrix A = X.transpose() * X + alpha * Matrix::Identity(8, 8);
            const Matrix oracle = A.ldlt().solve(X.transpose() * Y);
            CHECK((ridge_fit(X, Y, alpha) - oracle).cwiseAbs().maxCoeff() < 1e-10);
        }
    }

    TEST_CASE("orthonormal columns shrink by 1/(1+alpha)")
    {
        const Matrix Q = Eigen::HouseholderQR<Matrix>(testing::gaussian(30, 6, 5)).householderQ() *
                         Matrix::Identity(30, 6);
        const Matrix Y = testing::gaussian(30, 2, 6);
        CHECK((ridge_fit(Q, Y, 1.0) - Q.transpose() * Y / 2.0).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((ridge_fit(Q, Y, 3.0) - Q.transpose() * Y / 4.0).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("huge alpha drives weights to zero")
    {
        const Matrix X = testing::gaussian(50, 5, 7), Y = testing::gaussian(50, 3, 8);
        CHECK(ridge_fit(X, Y, 1e12).cwiseAbs().maxCoeff() < 1e-6);
    }

    TEST_CASE("training residual is non-decreasing in alpha")
    {
        const Matrix X = testing::gaussian(80, 12, 9), Y = testing::gaussian(80, 5, 10);
        const RidgePath<double> path(X, Y);
        double previous = -1.0;
        for (int e = -4; e <= 6; ++e) {
            const double residual = (Y - X * path.weights(std::pow(10.0, e))).norm();
            CHECK(residual >= previous - 1e-12);
            previous = residual;
        }
    }

    TEST_CASE("path predictions agree with direct fits")
    {
        const Matrix X = testing::gaussian(40, 6, 11), Y = testing::gaussian(40, 3, 12);
        const Matrix Xn = testing::gaussian(7, 6, 13);
        const RidgePath<double> path(X, Y);
        const Matrix projected = path.project(Xn);
        for (double alpha : {0.01, 1.0, 100.0})
            CHECK((path.predict(projected, alpha) - Xn * ridge_fit(X, Y, alpha)).cwiseAbs().maxCoeff() < 1e-10);
    }

    TEST_CASE("single precision follows the same path")
    {
        const Matrix X = testing::gaussian(50, 4, 14), Y = testing::gaussian(50, 2, 15);
        const Eigen::MatrixXf Wf = ridge_fit(Eigen::MatrixXf(X.cast<float>()), Eigen::MatrixXf(Y.cast<float>()), 2.0f);
        CHECK((Wf.cast<double>() - ridge_fit(X, Y, 2.0)).cwiseAbs().maxCoeff() < 1e-4);
    }

    TEST_CASE("banded ridge with equal penalties equals plain ridge")
    {
        const Matrix X = testing::gaussian(40, 9, 16), Y = testing::gaussian(40, 3, 17);
        const std::vector<Band> bands{{0, 4}, {4, 9}};
        const std::vector<double> penalties{3.0, 3.0};
        CHECK((banded_ridge_fit(X, Y, bands, std::span<const double>(penalties)) - ridge_fit(X, Y, 3.0))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }

    TEST_CASE("banded ridge matches the block-penalty normal equations")
    {
        const Matrix X = testing::gaussian(40, 7, 18), Y = testing::gaussian(40, 2, 19);
        const std::vector<Band> bands{{0, 2}, {2, 5}, {5, 7}};
        const std::vector<double> penalties{0.5, 20.0, 1e3};
        Vector diag(7);
        diag << 0.5, 0.5, 20.0, 20.0, 20.0, 1e3, 1e3;
        const Matrix oracle = (X.transpose() * X + Matrix(diag.asDiagonal())).ldlt().solve(X.transpose() * Y);
        CHECK((banded_ridge_fit(X, Y, bands, std::span<const double>(penalties)) - oracle).cwiseAbs().maxCoeff() <
              1e-10);
    }

    TEST_CASE("band validation")
    {
        const std::vector<Band> gap{{0, 2}, {3, 5}}, overlap{{0, 3}, {2, 5}}, many{{0, 1}, {1, 2}, {2, 3}, {3, 5}};
        CHECK_THROWS_AS(validate_bands(gap, 5), std::invalid_argument);
        CHECK_THROWS_AS(validate_bands(overlap, 5), std::invalid_argument);
        CHECK_THROWS_AS(validate_bands(many, 5), std::invalid_argument);
        const std::vector<Band> ok{{2, 5}, {0, 2}};
        CHECK_NOTHROW(validate_bands(ok, 5));
    }

    TEST_CASE("pearson reference values")
    {
        Vector a(3), b(3);
        a << 1, 2, 3;
        b << 1, 2, 4;
        CHECK(pearson(a, b) == doctest::Approx(0.9819805060619657).epsilon(1e-14));
        CHECK(pearson(a, -a) == -1.0);
        CHECK(std::isnan(pearson(a, Vector::Constant(3, 2.0))));
    }

    TEST_CASE("ridge rejects bad input")
    {
        CHECK_THROWS_AS(ridge_fit(Matrix::Ones(3, 2), Matrix::Ones(4, 1), 1.0), std::invalid_argument);
        CHECK_THROWS_AS(ridge_fit(Matrix::Ones(3, 2), Matrix::Ones(3, 1), -1.0), std::invalid_argument);
        Matrix bad = Matrix::Ones(3, 2);
        bad(0, 0) = std::nan("");
        CHECK_THROWS_AS(ridge_fit(bad, Matrix::Ones(3, 1), 1.0), std::invalid_argument);
    }
}
