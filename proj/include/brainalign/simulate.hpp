#pragma once

// Synthetic datasets with known ground truth. Every draw comes from the
// counter-based generator keyed by the config seed, so output depends only on
// the config.

#include "brainalign/common.hpp"
#include "brainalign/manifest.hpp"
#include "brainalign/surprisal.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace brainalign::sim {

struct SimConfig {
    std::uint64_t seed = 0;
    std::string language = "sim";
    std::size_t subjects = 4;
    std::size_t runs = 9;
    std::size_t trs_per_run = 60;
    std::size_t rois = 100;
    std::size_t feature_dims = 8;
    std::size_t layers = 1;
    std::vector<int> signal_rois;
    std::vector<double> effects; ///< per signal ROI; empty means `effect` everywhere
    double effect = 1.0;         ///< signal sd in units of noise sd
    double noise_sd = 1.0;       ///< noise added to signal ROIs
    double null_sd = 1.0;        ///< noise of ROIs without signal
    double tr = 2.0;
    double word_rate = 2.0;      ///< words per second
    int signal_layer = 1;        ///< layer whose features drive the BOLD signal
    double layer_correlation = 0.5;
    double ar1 = 0.0;            ///< optional AR(1) coefficient of the noise
    bool tokens = false;         ///< also emit a synthetic token table

    void validate() const;
    double effect_of(std::size_t signal_index) const;
};

struct Simulation {
    io::Dataset dataset;
    Matrix true_weights; ///< feature_dims x ROI, zero columns for null ROIs
    std::vector<int> signal_rois;
    std::optional<surprisal::TokenTable> tokens;
};

/// Words at jittered onsets t_i = (i + u_i) / rate, Gaussian features per layer
/// sharing a common component, and BOLD = effect * z(design * w) + noise_sd * e
/// on signal ROIs, null_sd * e elsewhere.
Simulation synth_dataset(const SimConfig& config);

/// Three languages whose signal ROIs are shared plus each private set. Sets
/// must be disjoint and inside the ROI range.
std::array<Simulation, 3> synth_three_languages(const SimConfig& base, const std::vector<int>& shared,
                                                const std::array<std::vector<int>, 3>& privates);

/// Writes the dataset layout plus `truth/weights.enc` and `truth/signal.json`;
/// returns the manifest path.
std::filesystem::path write_simulation(const Simulation& sim, const std::filesystem::path& dir);

} // namespace brainalign::sim
