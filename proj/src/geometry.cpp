#include "brainalign/geometry.hpp"
#include "brainalign/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace brainalign::geometry {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void offer(TwoNeighbors& best, double d)
{
    if (d < best.d1) {
        best.d2 = best.d1;
        best.d1 = d;
    } else if (d < best.d2) {
        best.d2 = d;
    }
}
} // namespace

NormalizedRows l2_normalize_rows(const Matrix& points)
{
    NormalizedRows out;
    std::vector<Index> rows;
    for (Index i = 0; i < points.rows(); ++i) {
        if (points.row(i).norm() > 0.0)
            rows.push_back(i);
        else
            ++out.dropped;
    }
    out.points.resize(static_cast<Index>(rows.size()), points.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.points.row(static_cast<Index>(k)) = points.row(rows[k]) / points.row(rows[k]).norm();
        out.kept.push_back(static_cast<std::size_t>(rows[k]));
    }
    return out;
}

KdTree::KdTree(const Matrix& points, Index leaf_size) : data_(points), leaf_size_(std::max<Index>(leaf_size, 2))
{
    index_.resize(static_cast<std::size_t>(data_.rows()));
    std::iota(index_.begin(), index_.end(), Index{0});
    nodes_.reserve(static_cast<std::size_t>(2 * data_.rows() / leaf_size_ + 2));
    if (data_.rows() > 0)
        build(0, data_.rows());
}

Index KdTree::build(Index begin, Index end)
{
    const auto id = static_cast<Index>(nodes_.size());
    nodes_.push_back({begin, end, -1, 0.0, -1, -1});
    if (end - begin <= leaf_size_)
        return id;

    Index best_dim = 0;
    double best_spread = -1.0;
    for (Index k = 0; k < data_.cols(); ++k) {
        double lo = kInf, hi = -kInf;
        for (Index i = begin; i < end; ++i) {
            const double v = data_(index_[static_cast<std::size_t>(i)], k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = k;
        }
    }
    if (best_spread <= 0.0)
        return id; // all points coincide

    const Index mid = begin + (end - begin) / 2;
    auto first = index_.begin() + begin;
    std::nth_element(first, index_.begin() + mid, index_.begin() + end,
                     [&](Index a, Index b) { return data_(a, best_dim) < data_(b, best_dim); });
    const double split = data_(index_[static_cast<std::size_t>(mid)], best_dim);

    nodes_[static_cast<std::size_t>(id)].split_dim = best_dim;
    nodes_[static_cast<std::size_t>(id)].split = split;
    const Index left = build(begin, mid);
    const Index right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void KdTree::search(Index node_id, const double* q, Index self, TwoNeighbors& best) const
{
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.split_dim < 0) {
        for (Index i = node.begin; i < node.end; ++i) {
            const Index p = index_[static_cast<std::size_t>(i)];
            if (p != self)
                offer(best, squared_distance(q, data_.row(p).data(), data_.cols()));
        }
        return;
    }
    // Left holds values <= split, right holds values >= split.
    const double delta = q[node.split_dim] - node.split;
    const Index near = delta <= 0.0 ? node.left : node.right;
    const Index far = delta <= 0.0 ? node.right : node.left;
    search(near, q, self, best);
    if (delta * delta <= best.d2)
        search(far, q, self, best);
}

TwoNeighbors KdTree::query(Index i) const
{
    TwoNeighbors best{kInf, kInf};
    search(0, data_.row(i).data(), i, best);
    return best;
}

namespace {

std::vector<TwoNeighbors> all_neighbors(const Matrix& points, NeighborSearch search)
{
    const Index n = points.rows();
    std::vector<TwoNeighbors> out(static_cast<std::size_t>(n), TwoNeighbors{kInf, kInf});
    if (search == NeighborSearch::KdTree) {
        const KdTree tree(points);
        for (Index i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = tree.query(i);
        return out;
    }
    const RowMatrix data = points;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j)
                offer(out[static_cast<std::size_t>(i)], squared_distance(data.row(i).data(), data.row(j).data(), data.cols()));
    return out;
}

} // namespace

NeighborRatios two_nn_ratios(const Matrix& points, NeighborSearch search)
{
    if (points.rows() < 3)
        throw std::invalid_argument("two_nn: need at least 3 points");
    if (!all_finite(points))
        throw std::invalid_argument("two_nn: non-finite coordinates");

    const auto first_pass = all_neighbors(points, search);
    std::vector<Index> keep;
    for (Index i = 0; i < points.rows(); ++i)
        if (std::sqrt(first_pass[static_cast<std::size_t>(i)].d1) >= kDuplicateDistance)
            keep.push_back(i);

    NeighborRatios out;
    out.duplicates_removed = static_cast<std::size_t>(points.rows()) - keep.size();
    if (keep.size() < 3)
        throw NumericError("two_nn: fewer than 3 distinct points after duplicate removal");

    const Matrix distinct = points(keep, Eigen::all);
    const auto neighbors = out.duplicates_removed ? all_neighbors(distinct, search) : first_pass;
    const auto n = static_cast<Index>(keep.size());
    out.r1.resize(n);
    out.r2.resize(n);
    out.mu.resize(n);
    for (Index i = 0; i < n; ++i) {
        const auto& nb = neighbors[static_cast<std::size_t>(i)];
        out.r1(i) = std::sqrt(nb.d1);
        out.r2(i) = std::sqrt(nb.d2);
        out.mu(i) = out.r2(i) / out.r1(i);
        out.kept.push_back(static_cast<std::size_t>(keep[static_cast<std::size_t>(i)]));
    }
    return out;
}

std::vector<std::size_t> subsample_rows(std::size_t n, std::size_t max_n, std::uint64_t seed)
{
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (n <= max_n)
        return rows;
    RandomStream rng(seed, 0x1d);
    for (std::size_t i = 0; i < max_n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(rows[i], rows[j]);
    }
    rows.resize(max_n);
    std::sort(rows.begin(), rows.end());
    return rows;
}

IdEstimate two_nn_id(const Matrix& points, std::size_t max_n, std::uint64_t seed)
{
    if (points.rows() < 3)
        throw std::invalid_argument("two_nn_id: need at least 3 points");
    if (max_n < 3)
        throw std::invalid_argument("two_nn_id: max_n must be >= 3");
    const auto rows = subsample_rows(static_cast<std::size_t>(points.rows()), max_n, seed);
    std::vector<Index> idx(rows.begin(), rows.end());
    const Matrix sample = points(idx, Eigen::all);

    const auto ratios = two_nn_ratios(sample);
    const double log_sum = ratios.mu.array().log().sum();
    if (!(log_sum > 0.0))
        throw NumericError("two_nn_id: sum of log ratios is zero; ID undefined");

    IdEstimate est;
    est.n_used = ratios.size();
    est.duplicates_removed = ratios.duplicates_removed;
    est.seed = seed;
    est.id = static_cast<double>(est.n_used) / log_sum;
    est.exceeds_ambient_bound = est.id > 2.0 * static_cast<double>(points.cols());
    return est;
}

std::vector<GroupId> id_per_group(const Matrix& points, std::span<const int> groups, std::size_t max_n,
                                  std::uint64_t seed, unsigned threads)
{
    if (groups.size() != static_cast<std::size_t>(points.rows()))
        throw std::invalid_argument("id_per_group: one label per point required");
    std::map<int, std::vector<Index>> members;
    for (std::size_t i = 0; i < groups.size(); ++i)
        members[groups[i]].push_back(static_cast<Index>(i));

    std::vector<GroupId> out;
    for (const auto& [g, rows] : members)
        out.push_back({g, {}});
    parallel_for(out.size(), threads, [&](std::size_t k) {
        const auto& rows = members.at(out[k].group);
        out[k].estimate = two_nn_id(points(rows, Eigen::all), max_n, seed);
    });
    return out;
}

} // namespace brainalign::geometry
