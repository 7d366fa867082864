#pragma once

#include "brainalign/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace brainalign::geometry {

struct NormalizedRows {
    Matrix points;                  ///< unit-norm rows
    std::vector<std::size_t> kept;  ///< source row of each output row
    std::size_t dropped = 0;        ///< all-zero rows removed
};

NormalizedRows l2_normalize_rows(const Matrix& points);

/// Squared Euclidean distance summed in coordinate order. Both neighbor
/// searches use it, so their results agree bit for bit.
inline double squared_distance(const double* a, const double* b, Index dim)
{
    double s = 0.0;
    for (Index k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

struct TwoNeighbors {
    double d1 = 0.0; ///< squared distance to the nearest other point
    double d2 = 0.0; ///< squared distance to the second nearest
};

/// Exact k-d tree for first/second nearest neighbor queries.
class KdTree {
public:
    explicit KdTree(const Matrix& points, Index leaf_size = 16);

    /// Neighbors of stored point `i`, excluding itself (duplicates count).
    TwoNeighbors query(Index i) const;

    Index size() const { return data_.rows(); }
    Index dim() const { return data_.cols(); }

private:
    struct Node {
        Index begin = 0, end = 0; ///< range in index_
        Index split_dim = -1;     ///< -1 for leaves
        double split = 0.0;
        Index left = -1, right = -1;
    };

    Index build(Index begin, Index end);
    void search(Index node, const double* q, Index self, TwoNeighbors& best) const;

    RowMatrix data_;
    std::vector<Index> index_;
    std::vector<Node> nodes_;
    Index leaf_size_;
};

enum class NeighborSearch { KdTree, BruteForce };

struct NeighborRatios {
    Vector r1;
    Vector r2;
    Vector mu; ///< r2 / r1
    std::vector<std::size_t> kept; ///< source row of each retained point
    std::size_t duplicates_removed = 0;

    std::size_t size() const { return static_cast<std::size_t>(mu.size()); }
};

/// Points closer than this to another point count as duplicates.
inline constexpr double kDuplicateDistance = 1e-12;

/// First/second neighbor distances and their ratio for every point, after
/// removing every point whose nearest neighbor lies within 1e-12.
NeighborRatios two_nn_ratios(const Matrix& points, NeighborSearch search = NeighborSearch::KdTree);

struct IdEstimate {
    double id = 0.0;
    std::size_t n_used = 0;
    std::size_t duplicates_removed = 0;
    std::uint64_t seed = 0;
    bool exceeds_ambient_bound = false; ///< id > 2 x ambient dimension
};

inline constexpr std::size_t kDefaultMaxPoints = 8000;

/// Row indices of a seeded subsample without replacement, ascending.
std::vector<std::size_t> subsample_rows(std::size_t n, std::size_t max_n, std::uint64_t seed);

/// Two-nearest-neighbor maximum-likelihood ID: N / sum(ln mu) over retained
/// points, after subsampling to at most `max_n` rows.
IdEstimate two_nn_id(const Matrix& points, std::size_t max_n = kDefaultMaxPoints, std::uint64_t seed = 0);

struct GroupId {
    int group = 0;
    IdEstimate estimate;
};

/// two_nn_id per group label (e.g. run id), groups in ascending order.
std::vector<GroupId> id_per_group(const Matrix& points, std::span<const int> groups,
                                  std::size_t max_n = kDefaultMaxPoints, std::uint64_t seed = 0,
                                  unsigned threads = 1);

} // namespace brainalign::geometry
