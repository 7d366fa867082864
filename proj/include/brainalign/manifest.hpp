#pragma once

#include "brainalign/common.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace brainalign::io {

/// Networks in canonical display order (Yeo-7 plus subcortex).
const std::vector<std::string>& network_labels();

struct AtlasEntry {
    int roi_id = 0;
    std::string name;
    std::string network;
    std::string hemisphere;
};

struct Atlas {
    std::vector<AtlasEntry> rois;

    std::size_t size() const { return rois.size(); }
    /// Networks present in this atlas, in canonical order.
    std::vector<std::string> networks() const;
};

/// Parses `roi_id,name,network,hemisphere` with a header row. Ids must be
/// dense from 0 and every network label known.
Atlas parse_atlas_csv(const std::string& text);
Atlas read_atlas_csv(const std::filesystem::path& path);
std::string format_atlas_csv(const Atlas& atlas);

struct WordRecord {
    std::string word;
    double onset_sec = 0.0;
    int run_id = 0;
    std::size_t word_index = 0; ///< row in every layer's feature matrix
};

std::vector<WordRecord> parse_word_records(const std::string& jsonl);
std::vector<WordRecord> read_word_records(const std::filesystem::path& path);
std::string format_word_records(const std::vector<WordRecord>& words);

struct RunSpec {
    int id = 0;
    double tr = 0.0;
    std::size_t n_tr = 0;
    std::map<std::string, std::filesystem::path> bold; ///< subject id -> TR x ROI matrix
};

struct TokenFiles {
    std::filesystem::path surprisal; ///< tokens x layers ENC1
    std::filesystem::path alignment; ///< JSON lines, one per token
};

/// Validated dataset description. Paths are resolved against the manifest's
/// directory.
struct DatasetManifest {
    std::string language;
    std::vector<std::string> subjects;
    std::vector<RunSpec> runs;
    std::filesystem::path atlas;
    std::vector<std::filesystem::path> features; ///< index 0 is layer 1
    std::filesystem::path words;
    std::optional<TokenFiles> tokens;
    std::filesystem::path base_dir;

    std::size_t layer_count() const { return features.size(); }
};

class ManifestError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Reads and eagerly validates a manifest: every referenced file is parsed,
/// TR counts are checked against bold rows, layers must be contiguous from 1.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes the manifest JSON with paths relative to the manifest directory.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Fully loaded dataset.
struct Dataset {
    std::string language;
    std::vector<std::string> subjects;
    std::vector<int> run_ids;
    std::vector<double> run_tr;
    std::vector<std::size_t> run_n_tr;
    Atlas atlas;
    std::vector<WordRecord> words;
    std::vector<Matrix> features;          ///< per layer, words x dims
    std::vector<std::vector<Matrix>> bold; ///< [subject][run], TR x ROI

    std::size_t roi_count() const { return atlas.size(); }
    std::size_t layer_count() const { return features.size(); }
    /// Word records of one run, in word_index order.
    std::vector<WordRecord> run_words(int run_id) const;
};

Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes `dataset` under `dir` using the standard layout and returns the
/// manifest path. Token files, when given, must already exist.
std::filesystem::path write_dataset(const Dataset& dataset, const std::filesystem::path& dir,
                                    const std::optional<TokenFiles>& tokens = std::nullopt);

} // namespace brainalign::io
