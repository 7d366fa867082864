#include "brainalign/encoder.hpp"
#include "brainalign/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace brainalign::encoder {

namespace fs = std::filesystem;

std::vector<double> default_alpha_grid()
{
    std::vector<double> grid;
    for (int e = -2; e <= 6; ++e)
        grid.push_back(std::pow(10.0, e));
    return grid;
}

void validate_bands(std::span<const Band> bands, Index columns)
{
    if (bands.empty())
        throw std::invalid_argument("bands: at least one band required");
    if (bands.size() > kMaxBands)
        throw std::invalid_argument("bands: at most 3 bands are supported");
    std::vector<Band> sorted(bands.begin(), bands.end());
    std::sort(sorted.begin(), sorted.end(), [](const Band& a, const Band& b) { return a.begin < b.begin; });
    Index cursor = 0;
    for (const auto& b : sorted) {
        if (b.end <= b.begin)
            throw std::invalid_argument("bands: empty band");
        if (b.begin < cursor)
            throw std::invalid_argument("bands: overlapping bands");
        if (b.begin > cursor)
            throw std::invalid_argument("bands: columns not covered by any band");
        cursor = b.end;
    }
    if (cursor != columns)
        throw std::invalid_argument("bands: bands must cover all columns");
}

void RidgeConfig::validate(Index columns) const
{
    if (alphas.empty())
        throw std::invalid_argument("ridge config: empty alpha grid");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i]))
            throw std::invalid_argument("ridge config: alphas must be positive and finite");
        if (i > 0 && !(alphas[i] > alphas[i - 1]))
            throw std::invalid_argument("ridge config: alpha grid must be strictly increasing");
    }
    if (!bands.empty())
        validate_bands(bands, columns);
}

double finite_mean(std::span<const double> values)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : values) {
        if (std::isfinite(v)) {
            sum += v;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

namespace {

double finite_vector_mean(const Vector& v) { return encoder::finite_mean(std::span<const double>(v.data(), static_cast<std::size_t>(v.size()))); }

Matrix stack(std::span<const Matrix> parts, std::span<const std::size_t> indices)
{
    Index rows = 0;
    for (auto i : indices)
        rows += parts[i].rows();
    Matrix out(rows, parts[indices.front()].cols());
    Index at = 0;
    for (auto i : indices) {
        out.middleRows(at, parts[i].rows()) = parts[i];
        at += parts[i].rows();
    }
    return out;
}

using Penalty = std::vector<double>;

std::vector<Penalty> candidates(std::span<const double> grid, std::size_t n_bands)
{
    std::vector<Penalty> out;
    if (n_bands == 0) {
        for (double a : grid)
            out.push_back({a});
        return out;
    }
    std::vector<std::size_t> idx(n_bands, 0);
    for (;;) {
        Penalty p(n_bands);
        for (std::size_t b = 0; b < n_bands; ++b)
            p[b] = grid[idx[b]];
        out.push_back(std::move(p));
        std::size_t b = n_bands;
        while (b > 0) {
            --b;
            if (++idx[b] < grid.size())
                break;
            idx[b] = 0;
            if (b == 0)
                return out;
        }
    }
}

struct Split {
    Matrix x_train, y_train, x_test;
};

Split normalized_split(std::span<const Matrix> x_parts, std::span<const Matrix> y_parts,
                       std::span<const std::size_t> train, std::size_t test, bool zscore)
{
    Matrix x_train = stack(x_parts, train);
    Matrix y_train = stack(y_parts, train);
    if (!zscore)
        return {std::move(x_train), std::move(y_train), x_parts[test]};
    const auto xs = design::fit_column_stats(x_train);
    const auto ys = design::fit_column_stats(y_train);
    return {xs.apply(x_train), ys.apply(y_train), xs.apply(x_parts[test])};
}

Matrix fit_predict(const Split& split, std::span<const Band> bands, const Penalty& penalty)
{
    if (bands.empty())
        return split.x_test * ridge_fit(split.x_train, split.y_train, penalty.front());
    return split.x_test * banded_ridge_fit(split.x_train, split.y_train, bands, std::span<const double>(penalty));
}

// Leave-one-part-out mean Pearson (averaged over targets, then folds) for
// each candidate penalty.
std::vector<double> cross_validated_scores(std::span<const Matrix> x_parts, std::span<const Matrix> y_parts,
                                           std::span<const std::size_t> parts, std::span<const Penalty> cands,
                                           std::span<const Band> bands, bool zscore)
{
    std::vector<double> sum(cands.size(), 0.0);
    std::vector<std::size_t> count(cands.size(), 0);
    for (std::size_t held : parts) {
        std::vector<std::size_t> train;
        for (std::size_t i : parts)
            if (i != held)
                train.push_back(i);
        const Split split = normalized_split(x_parts, y_parts, train, held, zscore);
        const Matrix& observed = y_parts[held];

        auto accumulate = [&](std::size_t c, const Matrix& predicted) {
            const double m = finite_vector_mean(pearson_columns(predicted, observed));
            if (std::isfinite(m)) {
                sum[c] += m;
                ++count[c];
            }
        };
        if (bands.empty()) {
            const RidgePath<double> path(split.x_train, split.y_train);
            const Matrix projected = path.project(split.x_test);
            for (std::size_t c = 0; c < cands.size(); ++c)
                accumulate(c, path.predict(projected, cands[c].front()));
        } else {
            for (std::size_t c = 0; c < cands.size(); ++c)
                accumulate(c, fit_predict(split, bands, cands[c]));
        }
    }
    std::vector<double> scores(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c)
        scores[c] = count[c] ? sum[c] / static_cast<double>(count[c]) : std::numeric_limits<double>::quiet_NaN();
    return scores;
}

// First maximum wins, so ties go to the smallest penalty.
std::size_t best_candidate(const std::vector<double>& scores)
{
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (std::isfinite(scores[c]) && scores[c] > best_score) {
            best_score = scores[c];
            best = c;
        }
    }
    return best;
}

} // namespace

BandedSelection banded_ridge_select(const Matrix& X, const Matrix& Y, std::span<const Band> bands,
                                    std::span<const double> grid, std::span<const int> groups)
{
    validate_bands(bands, X.cols());
    if (grid.empty())
        throw std::invalid_argument("banded ridge: empty grid");
    if (groups.size() != static_cast<std::size_t>(X.rows()) || X.rows() != Y.rows())
        throw std::invalid_argument("banded ridge: one group label per row required");

    std::vector<int> labels(groups.begin(), groups.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.size() < 2)
        throw std::invalid_argument("banded ridge: need at least 2 groups for selection");

    std::vector<Matrix> x_parts, y_parts;
    for (int label : labels) {
        std::vector<Index> rows;
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (groups[i] == label)
                rows.push_back(static_cast<Index>(i));
        x_parts.push_back(X(rows, Eigen::all));
        y_parts.push_back(Y(rows, Eigen::all));
    }
    std::vector<std::size_t> parts(labels.size());
    std::iota(parts.begin(), parts.end(), 0);

    const auto cands = candidates(grid, bands.size());
    const auto scores = cross_validated_scores(x_parts, y_parts, parts, cands, bands, false);
    const std::size_t best = best_candidate(scores);

    BandedSelection out;
    out.penalties = cands[best];
    out.cv_score = scores[best];
    out.weights = banded_ridge_fit(X, Y, bands, std::span<const double>(out.penalties));
    return out;
}

FoldResult fit_fold(std::span<const Matrix> designs, std::span<const Matrix> bold, std::span<const int> run_ids,
                    std::size_t test_index, const RidgeConfig& config)
{
    if (designs.size() != bold.size() || designs.size() != run_ids.size())
        throw std::invalid_argument("loro_cv: one design, bold matrix and id per run required");
    if (designs.size() < 3)
        throw std::invalid_argument("loro_cv: at least 3 runs required");
    if (test_index >= designs.size())
        throw std::invalid_argument("loro_cv: test run out of range");
    config.validate(designs.front().cols());
    for (std::size_t i = 0; i < designs.size(); ++i) {
        if (designs[i].rows() != bold[i].rows())
            throw std::invalid_argument("loro_cv: design and bold row counts differ");
        if (designs[i].cols() != designs.front().cols() || bold[i].cols() != bold.front().cols())
            throw std::invalid_argument("loro_cv: inconsistent column counts across runs");
    }

    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < designs.size(); ++i)
        if (i != test_index)
            train.push_back(i);

    const auto cands = candidates(config.alphas, config.bands.size());
    std::size_t chosen = 0;
    if (config.inner == InnerCv::LeaveOneRunOut && cands.size() > 1)
        chosen = best_candidate(cross_validated_scores(designs, bold, train, cands, config.bands, true));

    const Split split = normalized_split(designs, bold, train, test_index, true);
    const Matrix predicted = fit_predict(split, config.bands, cands[chosen]);

    FoldResult fold;
    fold.test_run = run_ids[test_index];
    fold.penalties = cands[chosen];
    fold.r = pearson_columns(predicted, bold[test_index]);
    return fold;
}

LoroResult loro_cv(std::span<const Matrix> designs, std::span<const Matrix> bold, std::span<const int> run_ids,
                   const RidgeConfig& config, unsigned threads)
{
    if (designs.size() < 3)
        throw std::invalid_argument("loro_cv: at least 3 runs required");
    LoroResult out;
    out.folds.resize(designs.size());
    parallel_for(designs.size(), threads,
                 [&](std::size_t f) { out.folds[f] = fit_fold(designs, bold, run_ids, f, config); });

    const Index n_roi = out.folds.front().r.size();
    out.score.resize(n_roi);
    std::vector<double> values(out.folds.size());
    for (Index roi = 0; roi < n_roi; ++roi) {
        for (std::size_t f = 0; f < out.folds.size(); ++f)
            values[f] = out.folds[f].r(roi);
        out.score(roi) = finite_mean(values);
    }
    return out;
}

ScoreTensor ScoreTensor::zeros(std::string language, std::vector<std::string> subjects, std::vector<int> layers,
                               std::vector<int> runs, std::size_t n_roi)
{
    ScoreTensor t;
    t.language = std::move(language);
    t.subjects = std::move(subjects);
    t.layers = std::move(layers);
    t.runs = std::move(runs);
    t.n_roi = n_roi;
    const std::size_t sl = t.subjects.size() * t.layers.size();
    t.scores.assign(sl * n_roi, 0.0);
    t.folds.assign(sl * n_roi * t.runs.size(), 0.0);
    t.penalties.assign(sl * t.runs.size(), 0.0);
    return t;
}

std::size_t ScoreTensor::layer_position(int layer) const
{
    const auto it = std::find(layers.begin(), layers.end(), layer);
    if (it == layers.end())
        throw std::invalid_argument("score tensor: layer " + std::to_string(layer) + " not present");
    return static_cast<std::size_t>(it - layers.begin());
}

Matrix ScoreTensor::layer_scores(std::size_t l) const
{
    Matrix m(static_cast<Index>(subjects.size()), static_cast<Index>(n_roi));
    for (std::size_t s = 0; s < subjects.size(); ++s)
        for (std::size_t r = 0; r < n_roi; ++r)
            m(static_cast<Index>(s), static_cast<Index>(r)) = score(s, l, r);
    return m;
}

Matrix ScoreTensor::group_mean() const
{
    Matrix m(static_cast<Index>(layers.size()), static_cast<Index>(n_roi));
    for (std::size_t l = 0; l < layers.size(); ++l)
        m.row(static_cast<Index>(l)) = layer_scores(l).colwise().mean();
    return m;
}

ScoreTensor encode_dataset(const io::Dataset& dataset, const RidgeConfig& config, std::vector<int> layers,
                           unsigned threads, const design::HrfKernel& kernel)
{
    if (layers.empty()) {
        layers.resize(dataset.layer_count());
        std::iota(layers.begin(), layers.end(), 1);
    }
    if (dataset.run_ids.size() < 3)
        throw std::invalid_argument("encode: at least 3 runs required");

    std::vector<std::vector<Matrix>> designs(layers.size());
    parallel_for(layers.size(), threads, [&](std::size_t l) {
        for (auto& d : design::dataset_designs(dataset, layers[l], kernel))
            designs[l].push_back(std::move(d.values));
    });

    ScoreTensor tensor = ScoreTensor::zeros(dataset.language, dataset.subjects, layers, dataset.run_ids,
                                            dataset.roi_count());
    const std::size_t n_s = dataset.subjects.size();
    const std::size_t n_l = layers.size();
    const std::size_t n_f = dataset.run_ids.size();
    parallel_for(n_s * n_l * n_f, threads, [&](std::size_t task) {
        const std::size_t f = task % n_f;
        const std::size_t l = (task / n_f) % n_l;
        const std::size_t s = task / (n_f * n_l);
        const FoldResult fold = fit_fold(designs[l], dataset.bold[s], dataset.run_ids, f, config);
        for (std::size_t r = 0; r < tensor.n_roi; ++r)
            tensor.fold(s, l, r, f) = fold.r(static_cast<Index>(r));
        tensor.penalties[(s * n_l + l) * n_f + f] = fold.penalties.front();
    });

    std::vector<double> values(n_f);
    for (std::size_t s = 0; s < n_s; ++s)
        for (std::size_t l = 0; l < n_l; ++l)
            for (std::size_t r = 0; r < tensor.n_roi; ++r) {
                for (std::size_t f = 0; f < n_f; ++f)
                    values[f] = tensor.fold(s, l, r, f);
                tensor.score(s, l, r) = finite_mean(values);
            }
    return tensor;
}

namespace {

fs::path stem_of(const fs::path& path)
{
    std::string s = path.string();
    for (const std::string suffix : {".folds.enc", ".enc", ".json"})
        if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
            return s.substr(0, s.size() - suffix.size());
    return path;
}

fs::path with_suffix(const fs::path& stem, const std::string& suffix) { return fs::path(stem.string() + suffix); }

} // namespace

void write_score_tensor(const ScoreTensor& t, const fs::path& path)
{
    const fs::path stem = stem_of(path);
    io::Tensor scores;
    scores.shape = {t.subjects.size(), t.layers.size(), t.n_roi};
    scores.values = t.scores;
    io::write_tensor(scores, with_suffix(stem, ".enc"));

    io::Tensor folds;
    folds.shape = {t.subjects.size(), t.layers.size(), t.n_roi, t.runs.size()};
    folds.values = t.folds;
    io::write_tensor(folds, with_suffix(stem, ".folds.enc"));

    nlohmann::json index;
    index["language"] = t.language;
    index["subjects"] = t.subjects;
    index["layers"] = t.layers;
    index["runs"] = t.runs;
    index["n_roi"] = t.n_roi;
    index["order"] = "subject,layer,roi";
    index["fold_order"] = "subject,layer,roi,fold";
    index["penalties"] = t.penalties;
    io::write_file(with_suffix(stem, ".json"), index.dump(2) + "\n");
}

ScoreTensor read_score_tensor(const fs::path& path)
{
    const fs::path stem = stem_of(path);
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(io::read_file(with_suffix(stem, ".json")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("score index: ") + e.what());
    }
    ScoreTensor t = ScoreTensor::zeros(index.at("language").get<std::string>(),
                                       index.at("subjects").get<std::vector<std::string>>(),
                                       index.at("layers").get<std::vector<int>>(),
                                       index.at("runs").get<std::vector<int>>(), index.at("n_roi").get<std::size_t>());
    t.penalties = index.at("penalties").get<std::vector<double>>();

    const io::Tensor scores = io::read_tensor(with_suffix(stem, ".enc"));
    if (scores.shape != std::vector<std::size_t>{t.subjects.size(), t.layers.size(), t.n_roi})
        throw ConfigError("score tensor: shape does not match index");
    t.scores = scores.values;
    const fs::path folds_path = with_suffix(stem, ".folds.enc");
    if (fs::exists(folds_path)) {
        const io::Tensor folds = io::read_tensor(folds_path);
        if (folds.shape != std::vector<std::size_t>{t.subjects.size(), t.layers.size(), t.n_roi, t.runs.size()})
            throw ConfigError("score tensor: fold shape does not match index");
        t.folds = folds.values;
    }
    return t;
}

} // namespace brainalign::encoder
