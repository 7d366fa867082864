#include "support.hpp"

#include "brainalign/encoder.hpp"
#include "brainalign/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::encoder;

namespace {

sim::SimConfig small_config()
{
    sim::SimConfig c;
    c.subjects = 2;
    c.runs = 9;
    c.trs_per_run = 50;
    c.rois = 6;
    c.feature_dims = 4;
    c.layers = 2;
    c.signal_rois = {0, 1, 2};
    c.seed = 11;
    return c;
}

} // namespace

TEST_SUITE("encoder")
{
    TEST_CASE("noiseless single ROI is recovered")
    {
        sim::SimConfig c = small_config();
        c.subjects = 1;
        c.rois = 1;
        c.signal_rois = {0};
        c.noise_sd = 0.0;
        RidgeConfig rc;
        rc.alphas.insert(rc.alphas.begin(), 1e-6);
        const auto t = encode_dataset(sim::synth_dataset(c).dataset, rc, {1});
        CHECK(t.score(0, 0, 0) > 0.999);
        for (std::size_t f = 0; f < t.fold_count(); ++f)
            CHECK(t.fold(0, 0, 0, f) > 0.999);
    }

    TEST_CASE("one fold per run, in run order")
    {
        const auto ds = sim::synth_dataset(small_config()).dataset;
        const auto t = encode_dataset(ds, RidgeConfig{}, {1});
        CHECK(t.fold_count() == 9);
        CHECK(t.runs == ds.run_ids);
        CHECK(t.penalties.size() == 2 * 9);
    }

    TEST_CASE("white noise scores centre on zero")
    {
        sim::SimConfig c = small_config();
        c.subjects = 1;
        c.rois = 100;
        c.signal_rois.clear();
        const auto t = encode_dataset(sim::synth_dataset(c).dataset, RidgeConfig{}, {1});
        double mean = 0.0;
        for (std::size_t r = 0; r < 100; ++r)
            mean += t.score(0, 0, r) / 100.0;
        CHECK(std::fabs(mean) < 0.05);
    }

    TEST_CASE("held-out data never influences penalty selection")
    {
        const auto ds = sim::synth_dataset(small_config()).dataset;
        std::vector<Matrix> designs;
        for (auto& d : design::dataset_designs(ds, 1, design::hrf_kernel()))
            designs.push_back(d.values);
        std::vector<Matrix> bold = ds.bold[0];
        const RidgeConfig rc;
        for (std::size_t f : {0u, 4u, 8u}) {
            const FoldResult before = fit_fold(designs, bold, ds.run_ids, f, rc);
            std::vector<Matrix> tampered = bold;
            tampered[f] = testing::gaussian(bold[f].rows(), bold[f].cols(), 99) * 1e3;
            const FoldResult after = fit_fold(designs, tampered, ds.run_ids, f, rc);
            CHECK(after.penalties == before.penalties);
            CHECK(after.test_run == ds.run_ids[f]);
        }
    }

    TEST_CASE("score equals the mean of finite fold scores")
    {
        const auto t = encode_dataset(sim::synth_dataset(small_config()).dataset, RidgeConfig{}, {2});
        for (std::size_t r = 0; r < t.n_roi; ++r) {
            double sum = 0.0;
            for (std::size_t f = 0; f < t.fold_count(); ++f)
                sum += t.fold(1, 0, r, f);
            CHECK(t.score(1, 0, r) == doctest::Approx(sum / 9.0).epsilon(1e-14));
        }
        const std::vector<double> values{1.0, std::nan(""), 3.0};
        CHECK(finite_mean(values) == 2.0);
        CHECK(std::isnan(finite_mean(std::vector<double>{std::nan("")})));
    }

    TEST_CASE("results do not depend on the thread count")
    {
        const auto ds = sim::synth_dataset(small_config()).dataset;
        const auto one = encode_dataset(ds, RidgeConfig{}, {}, 1);
        const auto many = encode_dataset(ds, RidgeConfig{}, {}, 8);
        CHECK(one.scores == many.scores);
        CHECK(one.folds == many.folds);
        CHECK(one.penalties == many.penalties);
    }

    TEST_CASE("score tensor round trip")
    {
        testing::TempDir dir("tensor");
        const auto t = encode_dataset(sim::synth_dataset(small_config()).dataset, RidgeConfig{});
        write_score_tensor(t, dir / "scores");
        const auto back = read_score_tensor(dir / "scores.enc");
        CHECK(back.language == t.language);
        CHECK(back.subjects == t.subjects);
        CHECK(back.layers == t.layers);
        CHECK(back.runs == t.runs);
        CHECK(back.scores == t.scores);
        CHECK(back.folds == t.folds);
        CHECK(back.penalties == t.penalties);
    }

    TEST_CASE("constant held-out ROI gives NaN for that fold only")
    {
        auto ds = sim::synth_dataset(small_config()).dataset;
        ds.bold[0][3].col(5).setConstant(2.0);
        const auto t = encode_dataset(ds, RidgeConfig{}, {1});
        CHECK(std::isnan(t.fold(0, 0, 5, 3)));
        CHECK(std::isfinite(t.score(0, 0, 5)));
    }

    TEST_CASE("uninformative band receives the largest penalty")
    {
        const Matrix A = testing::gaussian(200, 3, 21), B = testing::gaussian(200, 3, 22);
        Matrix X(200, 6);
        X << A, B;
        const Matrix Y = A * testing::gaussian(3, 4, 23);
        std::vector<int> groups(200);
        for (int i = 0; i < 200; ++i)
            groups[static_cast<std::size_t>(i)] = i / 40;
        const std::vector<Band> bands{{0, 3}, {3, 6}};
        const std::vector<double> grid{1e-2, 1.0, 1e2, 1e4};
        const auto sel = banded_ridge_select(X, Y, bands, grid, groups);
        CHECK(sel.penalties[1] == 1e4);
        CHECK(sel.penalties[0] < sel.penalties[1]);
    }

    TEST_CASE("config validation")
    {
        RidgeConfig rc;
        rc.alphas = {1.0, 0.5};
        CHECK_THROWS_AS(rc.validate(3), std::invalid_argument);
        rc.alphas = {-1.0};
        CHECK_THROWS_AS(rc.validate(3), std::invalid_argument);
        rc.alphas = {};
        CHECK_THROWS_AS(rc.validate(3), std::invalid_argument);
    }
}
