#pragma once

#include "brainalign/common.hpp"
#include "brainalign/encoder.hpp"
#include "brainalign/manifest.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace brainalign::maps {

enum class Overlap : std::uint8_t { None, Only1, Only2, Only3, Pair12, Pair13, Pair23, SharedAll };

/// Figure-style classes: pairwise overlaps collapse into Partial.
enum class CoarseOverlap : std::uint8_t { None, Only1, Only2, Only3, Partial, SharedAll };

std::string_view overlap_name(Overlap c);
std::string_view coarse_overlap_name(CoarseOverlap c);
CoarseOverlap coarsen(Overlap c);

struct OverlapMap {
    std::vector<Overlap> category;

    std::array<std::size_t, 8> counts() const;
    std::vector<CoarseOverlap> coarse_mode() const;
};

OverlapMap overlap_categories(const std::vector<bool>& first, const std::vector<bool>& second,
                              const std::vector<bool>& third);

struct PreferredLayerMap {
    std::vector<int> layer; ///< 0 when no layer qualifies
    Vector score;           ///< maximum of the group-mean curve, NaN when none
};

/// Argmax over layers (rows of `group_mean`) per ROI; ties go to the lowest
/// layer. NaN entries never win, so masking a matrix first gives the
/// significant-only variant.
PreferredLayerMap preferred_layer(const Matrix& group_mean, std::span<const int> layer_ids);

/// Restricts each ROI's candidates to layers where `significant[l][roi]`.
PreferredLayerMap preferred_layer_significant(const Matrix& group_mean, std::span<const int> layer_ids,
                                              const std::vector<std::vector<bool>>& significant);

struct NetworkProfile {
    std::string language;
    std::vector<std::string> networks;
    std::vector<int> layers;
    Matrix values; ///< network x layer mean of ROI group scores
};

NetworkProfile network_profile(const encoder::ScoreTensor& scores, const io::Atlas& atlas,
                               std::vector<int> layers = {});

/// Pearson correlation of average ranks (ties share their mean rank).
double spearman(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Average ranks, 1-based.
Vector average_ranks(const Eigen::Ref<const Vector>& values);

/// Pairs (0,1), (0,2), (1,2), ... in lexicographic order.
std::vector<std::array<std::size_t, 2>> language_pairs(std::size_t n_languages);

struct Convergence {
    std::vector<int> layers;
    std::vector<std::array<std::size_t, 2>> pairs;
    Matrix pairwise; ///< layer x pair, NaN when missing
    Vector mean_abs; ///< mean of |r| over available pairs
    Vector abs_mean; ///< |mean r| over available pairs
};

/// Spearman across jointly finite ROIs for each layer and language pair.
/// Each map is layer x ROI with NaN off-mask; fewer than two shared finite
/// ROIs marks the pair missing.
Convergence map_convergence(std::span<const Matrix> masked_maps, std::span<const int> layer_ids);

} // namespace brainalign::maps
