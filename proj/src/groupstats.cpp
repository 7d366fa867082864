#include "brainalign/groupstats.hpp"
#include "brainalign/rng.hpp"
#include "brainalign/special_functions.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace brainalign::stats {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view sidedness_name(Sidedness s) { return s == Sidedness::Greater ? "greater" : "two-sided"; }

Sidedness parse_sidedness(std::string_view name)
{
    if (name == "greater" || name == "one-sided")
        return Sidedness::Greater;
    if (name == "two-sided")
        return Sidedness::TwoSided;
    throw std::invalid_argument("unknown sidedness '" + std::string(name) + "'");
}

TTest one_sample_t_one_sided(std::span<const double> scores, int ddof)
{
    const std::size_t n = scores.size();
    if (n < 2)
        throw std::invalid_argument("t-test: need at least 2 values");
    if (ddof < 0 || static_cast<std::size_t>(ddof) >= n)
        throw std::invalid_argument("t-test: ddof must lie in [0, n)");
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(n);
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (*lo == *hi) {
        // Degenerate sd: a zero mean is the symmetric null.
        if (mean > 0.0)
            return {std::numeric_limits<double>::infinity(), 0.0};
        if (mean < 0.0)
            return {-std::numeric_limits<double>::infinity(), 1.0};
        return {0.0, 0.5};
    }
    double ss = 0.0;
    for (double x : scores)
        ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - static_cast<std::size_t>(ddof)));
    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    return {t, student_t_upper(t, static_cast<double>(n - 1))};
}

FdrResult bh_fdr(std::span<const double> pvalues, double q)
{
    const std::size_t m = pvalues.size();
    for (double p : pvalues)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("bh_fdr: p values must lie in [0, 1]");
    FdrResult out;
    out.rejected.assign(m, false);
    out.adjusted.assign(m, 1.0);
    if (m == 0)
        return out;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    const double md = static_cast<double>(m);
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (pvalues[order[i]] <= static_cast<double>(i + 1) * q / md)
            k = i + 1;
    for (std::size_t i = 0; i < k; ++i)
        out.rejected[order[i]] = true;

    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        running = std::min(running, md * pvalues[order[i]] / static_cast<double>(i + 1));
        out.adjusted[order[i]] = std::min(running, 1.0);
    }
    return out;
}

namespace {

struct Counter {
    const Vector& observed;
    const Vector& tolerance;
    Sidedness sidedness;

    void count(const Eigen::Ref<const Vector>& t, std::vector<std::uint64_t>& hits) const
    {
        for (Index r = 0; r < t.size(); ++r) {
            const bool hit = sidedness == Sidedness::TwoSided
                                 ? std::fabs(t(r)) >= std::fabs(observed(r)) - tolerance(r)
                                 : t(r) >= observed(r) - tolerance(r);
            hits[static_cast<std::size_t>(r)] += hit;
        }
    }
};

std::vector<std::uint64_t> exact_counts(const Matrix& d, const Counter& counter, unsigned threads)
{
    const auto n = static_cast<std::size_t>(d.rows());
    const Index n_roi = d.cols();
    const std::size_t low_bits = std::min<std::size_t>(n, 10);
    const std::size_t high_bits = n - low_bits;
    const std::size_t n_low = std::size_t{1} << low_bits;
    const std::size_t n_high = std::size_t{1} << high_bits;

    // Partial sums over the low subjects, summed directly for each pattern.
    Matrix low(n_roi, static_cast<Index>(n_low));
    for (std::size_t m = 0; m < n_low; ++m) {
        Vector s = Vector::Zero(n_roi);
        for (std::size_t i = 0; i < low_bits; ++i)
            s += ((m >> i) & 1U ? -1.0 : 1.0) * d.row(static_cast<Index>(i)).transpose();
        low.col(static_cast<Index>(m)) = s;
    }

    const std::size_t chunk = std::max<std::size_t>(1, n_high / 64);
    const std::size_t n_chunks = (n_high + chunk - 1) / chunk;
    std::vector<std::vector<std::uint64_t>> partial(n_chunks, std::vector<std::uint64_t>(static_cast<std::size_t>(n_roi), 0));
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        Vector t(n_roi);
        for (std::size_t h = c * chunk; h < std::min(n_high, (c + 1) * chunk); ++h) {
            Vector base = Vector::Zero(n_roi);
            for (std::size_t i = 0; i < high_bits; ++i)
                base += ((h >> i) & 1U ? -1.0 : 1.0) * d.row(static_cast<Index>(low_bits + i)).transpose();
            for (std::size_t m = 0; m < n_low; ++m) {
                t = base + low.col(static_cast<Index>(m));
                counter.count(t, partial[c]);
            }
        }
    });
    std::vector<std::uint64_t> hits(static_cast<std::size_t>(n_roi), 0);
    for (const auto& p : partial)
        for (std::size_t r = 0; r < hits.size(); ++r)
            hits[r] += p[r];
    return hits;
}

std::vector<std::uint64_t> monte_carlo_counts(const Matrix& d, const Counter& counter, std::size_t n_perm,
                                              std::uint64_t seed, unsigned threads)
{
    constexpr std::size_t kBlock = 256;
    const Index n = d.rows();
    const Index n_roi = d.cols();
    const std::size_t n_blocks = (n_perm + kBlock - 1) / kBlock;
    std::vector<std::vector<std::uint64_t>> partial(n_blocks, std::vector<std::uint64_t>(static_cast<std::size_t>(n_roi), 0));

    parallel_for(n_blocks, threads, [&](std::size_t b) {
        const std::size_t first = b * kBlock;
        const std::size_t count = std::min(kBlock, n_perm - first);
        Matrix signs(static_cast<Index>(count), n);
        for (std::size_t k = 0; k < count; ++k) {
            const std::uint64_t perm = first + k;
            std::uint64_t bits = 0;
            for (Index i = 0; i < n; ++i) {
                if (i % 64 == 0)
                    bits = CounterHash::at(seed, perm, static_cast<std::uint64_t>(i / 64));
                signs(static_cast<Index>(k), i) = (bits >> (i % 64)) & 1U ? -1.0 : 1.0;
            }
        }
        const Matrix t = signs * d;
        for (Index k = 0; k < t.rows(); ++k)
            counter.count(t.row(k).transpose(), partial[b]);
    });
    std::vector<std::uint64_t> hits(static_cast<std::size_t>(n_roi), 0);
    for (const auto& p : partial)
        for (std::size_t r = 0; r < hits.size(); ++r)
            hits[r] += p[r];
    return hits;
}

} // namespace

SignFlipResult signflip_paired(const Matrix& diffs, const SignFlipOptions& options)
{
    const auto n = static_cast<std::size_t>(diffs.rows());
    if (n < 2)
        throw std::invalid_argument("sign-flip: need at least 2 subjects");

    bool exact = false;
    switch (options.mode) {
    case PermutationMode::Auto:
        exact = n <= kMaxExactSubjects;
        break;
    case PermutationMode::Exact:
        if (n > 24)
            throw std::invalid_argument("sign-flip: exact enumeration limited to 24 subjects");
        exact = true;
        break;
    case PermutationMode::MonteCarlo:
        exact = false;
        break;
    }
    if (!exact && options.n_perm < 100)
        throw std::invalid_argument("sign-flip: Monte Carlo needs n_perm >= 100");

    // ROIs with any non-finite difference are not tested (p = 1).
    Matrix d = diffs;
    std::vector<bool> testable(static_cast<std::size_t>(d.cols()), true);
    for (Index r = 0; r < d.cols(); ++r) {
        if (!d.col(r).allFinite()) {
            testable[static_cast<std::size_t>(r)] = false;
            d.col(r).setZero();
        }
    }

    const Vector observed = d.colwise().sum().transpose();
    const Vector tolerance = 1e-12 * d.cwiseAbs().colwise().sum().transpose();
    const Counter counter{observed, tolerance, options.sidedness};

    SignFlipResult out;
    out.exact = exact;
    out.statistic = observed / static_cast<double>(n);
    out.p.resize(d.cols());
    if (exact) {
        const auto hits = exact_counts(d, counter, options.threads);
        out.n_patterns = std::size_t{1} << n;
        for (Index r = 0; r < d.cols(); ++r)
            out.p(r) = static_cast<double>(hits[static_cast<std::size_t>(r)]) / static_cast<double>(out.n_patterns);
    } else {
        const auto hits = monte_carlo_counts(d, counter, options.n_perm, options.seed, options.threads);
        out.n_patterns = options.n_perm;
        for (Index r = 0; r < d.cols(); ++r)
            out.p(r) = static_cast<double>(hits[static_cast<std::size_t>(r)] + 1) /
                       static_cast<double>(options.n_perm + 1);
    }
    for (Index r = 0; r < d.cols(); ++r) {
        if (!testable[static_cast<std::size_t>(r)]) {
            out.p(r) = 1.0;
            out.statistic(r) = kNaN;
        }
    }
    return out;
}

std::size_t StatMap::significant_count() const
{
    return static_cast<std::size_t>(std::count(significant.begin(), significant.end(), true));
}

namespace {

void apply_fdr(StatMap& map, double q)
{
    const auto fdr = bh_fdr(std::span<const double>(map.p.data(), static_cast<std::size_t>(map.p.size())), q);
    map.significant = fdr.rejected;
    map.q = Eigen::Map<const Vector>(fdr.adjusted.data(), static_cast<Index>(fdr.adjusted.size()));
    map.masked_mean = map.group_mean;
    for (Index r = 0; r < map.masked_mean.size(); ++r)
        if (!map.significant[static_cast<std::size_t>(r)])
            map.masked_mean(r) = kNaN;
    map.descriptor.q = q;
}

} // namespace

Matrix layer_pair_fractions(const encoder::ScoreTensor& scores, double q, SignFlipOptions options)
{
    const std::size_t n_layers = scores.layer_count();
    if (n_layers < 2)
        throw std::invalid_argument("layer_pair_fractions: need at least 2 layers");
    options.sidedness = Sidedness::TwoSided;

    std::vector<Matrix> per_layer;
    for (std::size_t l = 0; l < n_layers; ++l)
        per_layer.push_back(scores.layer_scores(l));

    Matrix fractions = Matrix::Zero(static_cast<Index>(n_layers), static_cast<Index>(n_layers));
    for (std::size_t i = 0; i < n_layers; ++i) {
        for (std::size_t j = i + 1; j < n_layers; ++j) {
            const auto test = signflip_paired(per_layer[i] - per_layer[j], options);
            const auto fdr = bh_fdr(std::span<const double>(test.p.data(), static_cast<std::size_t>(test.p.size())), q);
            const double frac = static_cast<double>(std::count(fdr.rejected.begin(), fdr.rejected.end(), true)) /
                                static_cast<double>(scores.n_roi);
            fractions(static_cast<Index>(i), static_cast<Index>(j)) = frac;
            fractions(static_cast<Index>(j), static_cast<Index>(i)) = frac;
        }
    }
    return fractions;
}

StatMap model_compare(const Matrix& a, const Matrix& b, double q, const SignFlipOptions& options)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("model_compare: score matrices must have matching subjects and ROIs");
    const Matrix diffs = a - b;
    const auto test = signflip_paired(diffs, options);

    StatMap map;
    map.stat = test.statistic;
    map.p = test.p;
    map.group_mean = test.statistic;
    map.descriptor = {"paired-sign-flip", options.sidedness, static_cast<std::size_t>(a.rows()),
                      test.n_patterns, test.exact ? 0 : options.seed, q};
    apply_fdr(map, q);
    return map;
}

StatMap significance_map(const Matrix& subject_scores, double q, int ddof)
{
    if (subject_scores.rows() < 2)
        throw std::invalid_argument("significance_map: need at least 2 subjects");
    const Index n_roi = subject_scores.cols();
    StatMap map;
    map.stat.resize(n_roi);
    map.p.resize(n_roi);
    map.group_mean.resize(n_roi);
    std::vector<double> column;
    for (Index r = 0; r < n_roi; ++r) {
        column.clear();
        for (Index s = 0; s < subject_scores.rows(); ++s)
            if (std::isfinite(subject_scores(s, r)))
                column.push_back(subject_scores(s, r));
        map.group_mean(r) = encoder::finite_mean(column);
        if (column.size() < 2) {
            map.stat(r) = kNaN;
            map.p(r) = 1.0;
            continue;
        }
        const auto t = one_sample_t_one_sided(column, ddof);
        map.stat(r) = t.t;
        map.p(r) = t.p;
    }
    map.descriptor = {"one-sample-t", Sidedness::Greater, static_cast<std::size_t>(subject_scores.rows()), 0, 0, q};
    apply_fdr(map, q);
    return map;
}

StatMap significance_map(const encoder::ScoreTensor& scores, int layer, double q, int ddof)
{
    return significance_map(scores.layer_scores(scores.layer_position(layer)), q, ddof);
}

std::string format_statmap_csv(const StatMap& map)
{
    std::string out = "roi_id,stat,p,q,significant\n";
    for (Index r = 0; r < map.p.size(); ++r) {
        out += std::to_string(r) + "," + format_double(map.stat(r)) + "," + format_double(map.p(r)) + "," +
               format_double(map.q(r)) + "," + (map.significant[static_cast<std::size_t>(r)] ? "1" : "0") + "\n";
    }
    return out;
}

std::string format_statmap_descriptor(const StatMap& map)
{
    nlohmann::json j;
    j["kind"] = map.descriptor.kind;
    j["sidedness"] = sidedness_name(map.descriptor.sidedness);
    j["n_subjects"] = map.descriptor.n_subjects;
    j["n_permutations"] = map.descriptor.n_permutations;
    j["seed"] = map.descriptor.seed;
    j["q"] = map.descriptor.q;
    j["correction"] = "benjamini-hochberg";
    j["n_significant"] = map.significant_count();
    return j.dump(2) + "\n";
}

std::vector<ScoreRow> model_rows(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("model_rows: shape mismatch");
    std::vector<ScoreRow> rows;
    rows.reserve(static_cast<std::size_t>(2 * a.size()));
    for (Index s = 0; s < a.rows(); ++s)
        for (Index r = 0; r < a.cols(); ++r) {
            if (std::isfinite(a(s, r)))
                rows.push_back({static_cast<int>(s), static_cast<int>(r), 1, a(s, r)});
            if (std::isfinite(b(s, r)))
                rows.push_back({static_cast<int>(s), static_cast<int>(r), 0, b(s, r)});
        }
    return rows;
}

} // namespace brainalign::stats
