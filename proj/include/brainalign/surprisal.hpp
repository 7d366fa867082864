#pragma once

#include "brainalign/common.hpp"
#include "brainalign/maps.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace brainalign::surprisal {

struct TokenRecord {
    std::size_t token_index = 0; ///< row in the surprisal matrix
    std::size_t word_index = 0;
    int run_id = 0;
    int sentence_id = 0;
    int position = 0; ///< position within the sentence
};

/// Per-token, per-layer -log p in nats, special tokens excluded upstream.
struct TokenTable {
    Matrix surprisal; ///< tokens x layers
    std::vector<TokenRecord> alignment;

    void validate() const;
};

TokenTable read_token_table(const std::filesystem::path& matrix_path, const std::filesystem::path& alignment_path);
void write_token_table(const TokenTable& table, const std::filesystem::path& matrix_path,
                       const std::filesystem::path& alignment_path);

struct SurprisalTable {
    Matrix values;            ///< words x layers
    std::vector<int> run_ids; ///< per word
};

/// Sums token surprisal into words. Every word index from 0 to the largest
/// aligned index must receive at least one token.
SurprisalTable aggregate_word_surprisal(const TokenTable& tokens);

/// Arithmetic mean over words, per layer.
Vector layer_mean_surprisal(const SurprisalTable& table);

/// Distinct run ids, ascending, with the run x layer mean surprisal.
struct RunProfile {
    std::vector<int> runs;
    Matrix means; ///< run x layer
};

RunProfile run_profile(const SurprisalTable& table);

struct SurprisalConvergence {
    std::vector<int> shared_runs;
    std::vector<Matrix> run_means; ///< per language, shared run x layer
    maps::Convergence correlation; ///< pairwise Pearson across runs
};

/// Pearson across runs shared by every language, per layer and language pair.
/// Both summaries are reported: |mean r| and mean |r|.
SurprisalConvergence surprisal_convergence(std::span<const SurprisalTable> languages);

} // namespace brainalign::surprisal
