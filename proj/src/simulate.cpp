#include "brainalign/simulate.hpp"
#include "brainalign/design.hpp"
#include "brainalign/io.hpp"
#include "brainalign/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace brainalign::sim {

namespace {

// Stream identifiers keep every kind of draw independent of the others.
enum StreamKind : std::uint64_t { kWords = 1, kFeatures = 2, kWeights = 3, kNoise = 4, kTokens = 5 };

std::uint64_t stream_id(StreamKind kind, std::uint64_t a = 0, std::uint64_t b = 0)
{
    return (static_cast<std::uint64_t>(kind) << 56) ^ (a << 28) ^ b;
}

std::string two_digit(const char* prefix, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
    return buf;
}

} // namespace

void SimConfig::validate() const
{
    if (subjects < 1 || runs < 1 || trs_per_run < 1 || rois < 1 || feature_dims < 1 || layers < 1)
        throw ConfigError("simulate: all counts must be >= 1");
    if (!(noise_sd >= 0.0) || !(null_sd >= 0.0))
        throw ConfigError("simulate: noise sd must be >= 0");
    if (!(tr > 0.0) || !(word_rate > 0.0))
        throw ConfigError("simulate: tr and word_rate must be > 0");
    if (signal_layer < 1 || static_cast<std::size_t>(signal_layer) > layers)
        throw ConfigError("simulate: signal_layer outside 1..layers");
    if (!(layer_correlation >= 0.0 && layer_correlation <= 1.0))
        throw ConfigError("simulate: layer_correlation must lie in [0, 1]");
    if (!(std::fabs(ar1) < 1.0))
        throw ConfigError("simulate: |ar1| must be < 1");
    std::set<int> seen;
    for (int r : signal_rois) {
        if (r < 0 || static_cast<std::size_t>(r) >= rois)
            throw ConfigError("simulate: signal ROI " + std::to_string(r) + " outside the ROI set");
        if (!seen.insert(r).second)
            throw ConfigError("simulate: duplicate signal ROI " + std::to_string(r));
    }
    if (!effects.empty() && effects.size() != signal_rois.size())
        throw ConfigError("simulate: one effect per signal ROI required");
    for (std::size_t i = 0; i < signal_rois.size(); ++i)
        if (!std::isfinite(effect_of(i)))
            throw ConfigError("simulate: effects must be finite");
    if (std::floor(static_cast<double>(trs_per_run) * tr * word_rate) < 1.0)
        throw ConfigError("simulate: runs too short for a single word");
}

double SimConfig::effect_of(std::size_t i) const { return effects.empty() ? effect : effects[i]; }

Simulation synth_dataset(const SimConfig& config)
{
    config.validate();
    Simulation sim;
    io::Dataset& ds = sim.dataset;
    ds.language = config.language;
    for (std::size_t s = 0; s < config.subjects; ++s)
        ds.subjects.push_back(two_digit("sub-", s + 1));

    const auto& labels = io::network_labels();
    for (std::size_t r = 0; r < config.rois; ++r) {
        char name[32];
        std::snprintf(name, sizeof name, "roi-%03zu", r);
        ds.atlas.rois.push_back({static_cast<int>(r), name, labels[r % labels.size()], r % 2 ? "R" : "L"});
    }

    // Words, run by run.
    const double duration = static_cast<double>(config.trs_per_run) * config.tr;
    const auto words_per_run = static_cast<std::size_t>(std::floor(duration * config.word_rate));
    for (std::size_t run = 0; run < config.runs; ++run) {
        const int run_id = static_cast<int>(run) + 1;
        ds.run_ids.push_back(run_id);
        ds.run_tr.push_back(config.tr);
        ds.run_n_tr.push_back(config.trs_per_run);
        RandomStream rng(config.seed, stream_id(kWords, run));
        for (std::size_t i = 0; i < words_per_run; ++i) {
            const double onset = std::min((static_cast<double>(i) + rng.uniform()) / config.word_rate,
                                          std::nextafter(duration, 0.0));
            ds.words.push_back({"w" + std::to_string(ds.words.size()), onset, run_id, ds.words.size()});
        }
    }

    // Features: a shared component plus a layer-specific one.
    const Index n_words = static_cast<Index>(ds.words.size());
    const Index dims = static_cast<Index>(config.feature_dims);
    auto gaussian = [](RandomStream rng, Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j)
                m(i, j) = rng.normal();
        return m;
    };
    const Matrix common = gaussian(RandomStream(config.seed, stream_id(kFeatures, 0)), n_words, dims);
    const double rho = config.layer_correlation;
    for (std::size_t l = 0; l < config.layers; ++l) {
        const Matrix own = gaussian(RandomStream(config.seed, stream_id(kFeatures, l + 1)), n_words, dims);
        ds.features.push_back(rho * common + std::sqrt(1.0 - rho * rho) * own);
    }

    // Ground truth weights and the noiseless signal.
    sim.signal_rois = config.signal_rois;
    sim.true_weights = Matrix::Zero(dims, static_cast<Index>(config.rois));
    for (int roi : config.signal_rois)
        sim.true_weights.col(roi) = gaussian(RandomStream(config.seed, stream_id(kWeights, static_cast<std::uint64_t>(roi))), dims, 1);

    const auto kernel = design::hrf_kernel();
    std::vector<Matrix> signal;
    const Matrix& drive = ds.features[static_cast<std::size_t>(config.signal_layer - 1)];
    Index total_rows = 0;
    for (int run_id : ds.run_ids) {
        const auto words = ds.run_words(run_id);
        Matrix f(static_cast<Index>(words.size()), dims);
        for (std::size_t i = 0; i < words.size(); ++i)
            f.row(static_cast<Index>(i)) = drive.row(static_cast<Index>(words[i].word_index));
        signal.push_back(design::build_design(f, std::span<const io::WordRecord>(words), config.tr,
                                              config.trs_per_run, kernel) *
                         sim.true_weights);
        total_rows += signal.back().rows();
    }
    // Scale each signal ROI to unit population sd over all runs.
    for (std::size_t k = 0; k < config.signal_rois.size(); ++k) {
        const Index roi = config.signal_rois[k];
        double sum = 0.0, sq = 0.0;
        for (const auto& m : signal)
            sum += m.col(roi).sum();
        const double mean = sum / static_cast<double>(total_rows);
        for (const auto& m : signal)
            sq += (m.col(roi).array() - mean).square().sum();
        const double sd = std::sqrt(sq / static_cast<double>(total_rows));
        const double scale = sd > 0.0 ? config.effect_of(k) / sd : 0.0;
        for (auto& m : signal)
            m.col(roi) = (m.col(roi).array() - mean) * scale;
    }

    std::vector<double> noise_sd(config.rois, config.null_sd);
    for (int roi : config.signal_rois)
        noise_sd[static_cast<std::size_t>(roi)] = config.noise_sd;

    ds.bold.resize(config.subjects);
    const double innovation = std::sqrt(1.0 - config.ar1 * config.ar1);
    for (std::size_t s = 0; s < config.subjects; ++s) {
        for (std::size_t run = 0; run < config.runs; ++run) {
            Matrix y = signal[run];
            RandomStream rng(config.seed, stream_id(kNoise, s, run));
            Vector previous = Vector::Zero(y.cols());
            for (Index t = 0; t < y.rows(); ++t) {
                for (Index r = 0; r < y.cols(); ++r) {
                    const double e = rng.normal();
                    const double v = t == 0 ? e : config.ar1 * previous(r) + innovation * e;
                    previous(r) = v;
                    y(t, r) += noise_sd[static_cast<std::size_t>(r)] * v;
                }
            }
            ds.bold[s].push_back(std::move(y));
        }
    }

    if (config.tokens) {
        // One to three tokens per word; surprisal drifts with depth.
        RandomStream rng(config.seed, stream_id(kTokens));
        surprisal::TokenTable table;
        std::vector<double> values;
        for (const auto& w : ds.words) {
            const auto n_tok = 1 + rng.below(3);
            for (std::uint64_t k = 0; k < n_tok; ++k) {
                const std::size_t idx = table.alignment.size();
                table.alignment.push_back({idx, w.word_index, w.run_id, static_cast<int>(w.word_index / 12),
                                           static_cast<int>(w.word_index % 12)});
                for (std::size_t l = 0; l < config.layers; ++l)
                    values.push_back(std::fabs(3.0 + 0.1 * static_cast<double>(l) + rng.normal()));
            }
        }
        table.surprisal = Eigen::Map<const RowMatrix>(values.data(), static_cast<Index>(table.alignment.size()),
                                                      static_cast<Index>(config.layers));
        sim.tokens = std::move(table);
    }
    return sim;
}

std::array<Simulation, 3> synth_three_languages(const SimConfig& base, const std::vector<int>& shared,
                                                const std::array<std::vector<int>, 3>& privates)
{
    std::set<int> taken(shared.begin(), shared.end());
    if (taken.size() != shared.size())
        throw ConfigError("synth_three_languages: duplicate shared ROI");
    for (const auto& p : privates)
        for (int r : p)
            if (taken.count(r))
                throw ConfigError("synth_three_languages: ROI " + std::to_string(r) +
                                  " is both shared and private");
    std::array<Simulation, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
        SimConfig c = base;
        c.seed = CounterHash::at(base.seed, 0x1a6, i);
        c.language = base.language + "-" + std::to_string(i + 1);
        c.signal_rois = shared;
        c.signal_rois.insert(c.signal_rois.end(), privates[i].begin(), privates[i].end());
        std::sort(c.signal_rois.begin(), c.signal_rois.end());
        c.effects.clear();
        out[i] = synth_dataset(c);
    }
    return out;
}

std::filesystem::path write_simulation(const Simulation& sim, const std::filesystem::path& dir)
{
    std::optional<io::TokenFiles> token_files;
    if (sim.tokens) {
        token_files = io::TokenFiles{dir / "tokens" / "surprisal.enc", dir / "tokens" / "alignment.jsonl"};
        surprisal::write_token_table(*sim.tokens, token_files->surprisal, token_files->alignment);
    }
    const auto manifest = io::write_dataset(sim.dataset, dir, token_files);
    io::write_matrix(sim.true_weights, dir / "truth" / "weights.enc");
    nlohmann::json j;
    j["signal_rois"] = sim.signal_rois;
    io::write_file(dir / "truth" / "signal.json", j.dump(2) + "\n");
    return manifest;
}

} // namespace brainalign::sim
