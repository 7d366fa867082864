#pragma once

#include "brainalign/common.hpp"
#include "brainalign/design.hpp"
#include "brainalign/manifest.hpp"
#include "brainalign/ridge.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace brainalign::encoder {

/// 10^-2 .. 10^6, nine points.
std::vector<double> default_alpha_grid();

enum class InnerCv {
    LeaveOneRunOut, ///< nested leave-one-run-out over the training runs
    None            ///< use the first grid value without selection
};

struct RidgeConfig {
    std::vector<double> alphas = default_alpha_grid();
    std::vector<Band> bands; ///< empty: plain ridge
    InnerCv inner = InnerCv::LeaveOneRunOut;

    void validate(Index columns) const;
};

/// Banded ridge with per-band penalties chosen by exhaustive search over
/// `grid`^k, scored by leave-one-group-out mean Pearson across targets.
struct BandedSelection {
    std::vector<double> penalties;
    double cv_score = 0.0;
    Matrix weights;
};

BandedSelection banded_ridge_select(const Matrix& X, const Matrix& Y, std::span<const Band> bands,
                                    std::span<const double> grid, std::span<const int> groups);

struct FoldResult {
    int test_run = 0;
    std::vector<double> penalties; ///< one entry for ridge, one per band for banded
    Vector r;                      ///< per ROI; NaN for zero-variance ROIs
};

struct LoroResult {
    Vector score; ///< mean over folds with finite r
    std::vector<FoldResult> folds;
};

/// One outer fold: penalty chosen on the training runs, model refit on all of
/// them, Pearson r on the held-out run. Z-scoring uses training rows only.
FoldResult fit_fold(std::span<const Matrix> designs, std::span<const Matrix> bold, std::span<const int> run_ids,
                    std::size_t test_index, const RidgeConfig& config);

/// Leave-one-run-out CV over all runs of one subject and layer (>= 3 runs).
LoroResult loro_cv(std::span<const Matrix> designs, std::span<const Matrix> bold, std::span<const int> run_ids,
                   const RidgeConfig& config, unsigned threads = 1);

/// Mean of the finite entries; NaN when there are none.
double finite_mean(std::span<const double> values);

/// subject x layer x ROI brain scores plus per-fold detail.
struct ScoreTensor {
    std::string language;
    std::vector<std::string> subjects;
    std::vector<int> layers;
    std::vector<int> runs; ///< fold order
    std::size_t n_roi = 0;
    std::vector<double> scores;    ///< [subject][layer][roi]
    std::vector<double> folds;     ///< [subject][layer][roi][fold]
    std::vector<double> penalties; ///< [subject][layer][fold], first band for banded fits

    static ScoreTensor zeros(std::string language, std::vector<std::string> subjects, std::vector<int> layers,
                             std::vector<int> runs, std::size_t n_roi);

    std::size_t subject_count() const { return subjects.size(); }
    std::size_t layer_count() const { return layers.size(); }
    std::size_t fold_count() const { return runs.size(); }

    double& score(std::size_t s, std::size_t l, std::size_t roi) { return scores[(s * layers.size() + l) * n_roi + roi]; }
    double score(std::size_t s, std::size_t l, std::size_t roi) const
    {
        return scores[(s * layers.size() + l) * n_roi + roi];
    }
    double& fold(std::size_t s, std::size_t l, std::size_t roi, std::size_t f)
    {
        return folds[((s * layers.size() + l) * n_roi + roi) * runs.size() + f];
    }
    double fold(std::size_t s, std::size_t l, std::size_t roi, std::size_t f) const
    {
        return folds[((s * layers.size() + l) * n_roi + roi) * runs.size() + f];
    }

    /// Position of a layer id in `layers`.
    std::size_t layer_position(int layer) const;
    /// subject x ROI scores at one layer position.
    Matrix layer_scores(std::size_t layer_pos) const;
    /// layer x ROI means across subjects.
    Matrix group_mean() const;
};

/// Brain scores for every subject and requested layer (empty: all layers).
/// Work is split over (subject, layer, fold); results do not depend on
/// `threads`.
ScoreTensor encode_dataset(const io::Dataset& dataset, const RidgeConfig& config, std::vector<int> layers = {},
                           unsigned threads = 1, const design::HrfKernel& kernel = design::hrf_kernel());

/// Writes `<stem>.enc` (S x L x R), `<stem>.folds.enc` (S x L x R x F) and the
/// `<stem>.json` index.
void write_score_tensor(const ScoreTensor& tensor, const std::filesystem::path& stem);
/// Accepts the stem or any of the three file names.
ScoreTensor read_score_tensor(const std::filesystem::path& path);

} // namespace brainalign::encoder
