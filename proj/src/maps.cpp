#include "brainalign/maps.hpp"
#include "brainalign/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace brainalign::maps {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view overlap_name(Overlap c)
{
    switch (c) {
    case Overlap::None: return "none";
    case Overlap::Only1: return "only-L1";
    case Overlap::Only2: return "only-L2";
    case Overlap::Only3: return "only-L3";
    case Overlap::Pair12: return "pair-L1L2";
    case Overlap::Pair13: return "pair-L1L3";
    case Overlap::Pair23: return "pair-L2L3";
    case Overlap::SharedAll: return "shared-all";
    }
    return "none";
}

std::string_view coarse_overlap_name(CoarseOverlap c)
{
    switch (c) {
    case CoarseOverlap::None: return "none";
    case CoarseOverlap::Only1: return "only-L1";
    case CoarseOverlap::Only2: return "only-L2";
    case CoarseOverlap::Only3: return "only-L3";
    case CoarseOverlap::Partial: return "partial";
    case CoarseOverlap::SharedAll: return "shared-all";
    }
    return "none";
}

CoarseOverlap coarsen(Overlap c)
{
    switch (c) {
    case Overlap::None: return CoarseOverlap::None;
    case Overlap::Only1: return CoarseOverlap::Only1;
    case Overlap::Only2: return CoarseOverlap::Only2;
    case Overlap::Only3: return CoarseOverlap::Only3;
    case Overlap::SharedAll: return CoarseOverlap::SharedAll;
    default: return CoarseOverlap::Partial;
    }
}

std::array<std::size_t, 8> OverlapMap::counts() const
{
    std::array<std::size_t, 8> out{};
    for (auto c : category)
        ++out[static_cast<std::size_t>(c)];
    return out;
}

std::vector<CoarseOverlap> OverlapMap::coarse_mode() const
{
    std::vector<CoarseOverlap> out;
    out.reserve(category.size());
    for (auto c : category)
        out.push_back(coarsen(c));
    return out;
}

OverlapMap overlap_categories(const std::vector<bool>& first, const std::vector<bool>& second,
                              const std::vector<bool>& third)
{
    if (first.size() != second.size() || first.size() != third.size())
        throw std::invalid_argument("overlap_categories: mask lengths differ");
    static constexpr Overlap table[8] = {Overlap::None,   Overlap::Only1,  Overlap::Only2,  Overlap::Pair12,
                                         Overlap::Only3,  Overlap::Pair13, Overlap::Pair23, Overlap::SharedAll};
    OverlapMap map;
    map.category.reserve(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        const unsigned key = (first[i] ? 1U : 0U) | (second[i] ? 2U : 0U) | (third[i] ? 4U : 0U);
        map.category.push_back(table[key]);
    }
    return map;
}

PreferredLayerMap preferred_layer(const Matrix& group_mean, std::span<const int> layer_ids)
{
    if (group_mean.rows() < 1)
        throw std::invalid_argument("preferred_layer: need at least one layer");
    if (static_cast<std::size_t>(group_mean.rows()) != layer_ids.size())
        throw std::invalid_argument("preferred_layer: one layer id per row required");
    PreferredLayerMap out;
    out.layer.assign(static_cast<std::size_t>(group_mean.cols()), 0);
    out.score = Vector::Constant(group_mean.cols(), kNaN);
    for (Index r = 0; r < group_mean.cols(); ++r) {
        for (Index l = 0; l < group_mean.rows(); ++l) {
            const double v = group_mean(l, r);
            if (std::isnan(v))
                continue;
            if (std::isnan(out.score(r)) || v > out.score(r)) {
                out.score(r) = v;
                out.layer[static_cast<std::size_t>(r)] = layer_ids[static_cast<std::size_t>(l)];
            }
        }
    }
    return out;
}

PreferredLayerMap preferred_layer_significant(const Matrix& group_mean, std::span<const int> layer_ids,
                                              const std::vector<std::vector<bool>>& significant)
{
    if (significant.size() != static_cast<std::size_t>(group_mean.rows()))
        throw std::invalid_argument("preferred_layer: one mask per layer required");
    Matrix masked = group_mean;
    for (Index l = 0; l < masked.rows(); ++l) {
        const auto& mask = significant[static_cast<std::size_t>(l)];
        if (mask.size() != static_cast<std::size_t>(masked.cols()))
            throw std::invalid_argument("preferred_layer: mask length mismatch");
        for (Index r = 0; r < masked.cols(); ++r)
            if (!mask[static_cast<std::size_t>(r)])
                masked(l, r) = kNaN;
    }
    return preferred_layer(masked, layer_ids);
}

NetworkProfile network_profile(const encoder::ScoreTensor& scores, const io::Atlas& atlas, std::vector<int> layers)
{
    if (atlas.size() != scores.n_roi)
        throw std::invalid_argument("network_profile: atlas does not cover the ROI set");
    for (const auto& e : atlas.rois)
        if (e.network.empty())
            throw std::invalid_argument("network_profile: ROI " + std::to_string(e.roi_id) + " has no network label");
    if (layers.empty())
        layers = scores.layers;

    NetworkProfile profile;
    profile.language = scores.language;
    profile.networks = atlas.networks();
    profile.layers = layers;
    profile.values.resize(static_cast<Index>(profile.networks.size()), static_cast<Index>(layers.size()));

    const Matrix group = scores.group_mean();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto l = static_cast<Index>(scores.layer_position(layers[li]));
        for (std::size_t n = 0; n < profile.networks.size(); ++n) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& e : atlas.rois) {
                if (e.network == profile.networks[n]) {
                    sum += group(l, e.roi_id);
                    ++count;
                }
            }
            profile.values(static_cast<Index>(n), static_cast<Index>(li)) = sum / static_cast<double>(count);
        }
    }
    return profile;
}

Vector average_ranks(const Eigen::Ref<const Vector>& values)
{
    const auto n = static_cast<std::size_t>(values.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values(static_cast<Index>(a)) < values(static_cast<Index>(b)); });
    Vector ranks(values.size());
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values(static_cast<Index>(order[j + 1])) == values(static_cast<Index>(order[i])))
            ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks(static_cast<Index>(order[k])) = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2)
        throw std::invalid_argument("spearman: need at least 2 values");
    return encoder::pearson(average_ranks(a), average_ranks(b));
}

std::vector<std::array<std::size_t, 2>> language_pairs(std::size_t n_languages)
{
    std::vector<std::array<std::size_t, 2>> pairs;
    for (std::size_t i = 0; i < n_languages; ++i)
        for (std::size_t j = i + 1; j < n_languages; ++j)
            pairs.push_back({i, j});
    return pairs;
}

Convergence map_convergence(std::span<const Matrix> maps, std::span<const int> layer_ids)
{
    if (maps.size() < 2)
        throw std::invalid_argument("map_convergence: need at least 2 languages");
    for (const auto& m : maps)
        if (m.rows() != maps.front().rows() || m.cols() != maps.front().cols())
            throw std::invalid_argument("map_convergence: maps must share layer and ROI spaces");
    if (static_cast<std::size_t>(maps.front().rows()) != layer_ids.size())
        throw std::invalid_argument("map_convergence: one layer id per row required");

    Convergence out;
    out.layers.assign(layer_ids.begin(), layer_ids.end());
    out.pairs = language_pairs(maps.size());
    const Index n_layers = maps.front().rows();
    out.pairwise = Matrix::Constant(n_layers, static_cast<Index>(out.pairs.size()), kNaN);
    out.mean_abs = Vector::Constant(n_layers, kNaN);
    out.abs_mean = Vector::Constant(n_layers, kNaN);

    for (Index l = 0; l < n_layers; ++l) {
        double sum = 0.0, sum_abs = 0.0;
        std::size_t count = 0;
        for (std::size_t p = 0; p < out.pairs.size(); ++p) {
            const auto& x = maps[out.pairs[p][0]];
            const auto& y = maps[out.pairs[p][1]];
            std::vector<double> xs, ys;
            for (Index r = 0; r < x.cols(); ++r) {
                if (std::isfinite(x(l, r)) && std::isfinite(y(l, r))) {
                    xs.push_back(x(l, r));
                    ys.push_back(y(l, r));
                }
            }
            if (xs.size() < 2)
                continue;
            const double rho = spearman(Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size())),
                                        Eigen::Map<const Vector>(ys.data(), static_cast<Index>(ys.size())));
            out.pairwise(l, static_cast<Index>(p)) = rho;
            if (std::isfinite(rho)) {
                sum += rho;
                sum_abs += std::fabs(rho);
                ++count;
            }
        }
        if (count > 0) {
            out.mean_abs(l) = sum_abs / static_cast<double>(count);
            out.abs_mean(l) = std::fabs(sum / static_cast<double>(count));
        }
    }
    return out;
}

} // namespace brainalign::maps
