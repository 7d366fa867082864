#pragma once

#include "brainalign/common.hpp"
#include "brainalign/encoder.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace brainalign::stats {

enum class Sidedness {
    Greater, ///< one-sided, H1: mean > 0
    TwoSided
};

std::string_view sidedness_name(Sidedness s);
Sidedness parse_sidedness(std::string_view name);

struct TTest {
    double t = 0.0;
    double p = 1.0;
};

/// One-sample one-sided t-test against zero: t = mean / (sd / sqrt(n)), p from
/// the upper tail of Student t with n - 1 df. `ddof` selects the sd divisor
/// (n - ddof). sd == 0 gives p = 0 when mean > 0, else p = 1.
TTest one_sample_t_one_sided(std::span<const double> scores, int ddof = 0);

struct FdrResult {
    std::vector<bool> rejected;
    std::vector<double> adjusted;
};

/// Benjamini-Hochberg step-up at level q.
FdrResult bh_fdr(std::span<const double> pvalues, double q);

enum class PermutationMode { Auto, Exact, MonteCarlo };

/// Largest subject count enumerated exactly in Auto mode (2^20 patterns).
inline constexpr std::size_t kMaxExactSubjects = 20;

struct SignFlipOptions {
    Sidedness sidedness = Sidedness::TwoSided;
    std::size_t n_perm = 10000;
    std::uint64_t seed = 0;
    PermutationMode mode = PermutationMode::Auto;
    unsigned threads = 1;
};

struct SignFlipResult {
    Vector statistic; ///< mean difference per ROI
    Vector p;
    bool exact = false;
    std::size_t n_patterns = 0; ///< 2^n when exact, else n_perm
};

/// Paired sign-flip permutation test on a subject x ROI difference matrix.
/// One sign pattern flips a subject's whole row, so patterns are shared across
/// ROIs. Monte Carlo patterns are a pure function of (seed, permutation index).
SignFlipResult signflip_paired(const Matrix& diffs, const SignFlipOptions& options);

struct TestDescriptor {
    std::string kind;
    Sidedness sidedness = Sidedness::Greater;
    std::size_t n_subjects = 0;
    std::size_t n_permutations = 0; ///< 0 for parametric tests
    std::uint64_t seed = 0;
    double q = 0.05;
};

struct StatMap {
    Vector stat;
    Vector p;
    Vector q;
    std::vector<bool> significant;
    Vector group_mean;  ///< mean across subjects
    Vector masked_mean; ///< group_mean on significant ROIs, NaN elsewhere
    TestDescriptor descriptor;

    std::size_t significant_count() const;
};

/// layer x layer fraction of ROIs whose scores differ (two-sided sign-flip,
/// BH across ROIs). Symmetric with a zero diagonal.
Matrix layer_pair_fractions(const encoder::ScoreTensor& scores, double q, SignFlipOptions options);

/// Sign-flip test on A - B (subject x ROI) followed by BH.
StatMap model_compare(const Matrix& a, const Matrix& b, double q, const SignFlipOptions& options);

/// Per-ROI one-sided t-test of subject scores at one layer, BH across ROIs.
StatMap significance_map(const encoder::ScoreTensor& scores, int layer, double q, int ddof = 0);
StatMap significance_map(const Matrix& subject_scores, double q, int ddof = 0);

/// CSV rows: roi_id,stat,p,q,significant.
std::string format_statmap_csv(const StatMap& map);
std::string format_statmap_descriptor(const StatMap& map);

// Crossed random-intercepts mixed model
// y = b0 + b1 * model + u_subject + v_roi + e, fitted by profiled REML.

struct ScoreRow {
    int subject = 0;
    int roi = 0;
    int model = 0; ///< 0 or 1
    double score = 0.0;
};

struct LmmOptions {
    double tolerance = 1e-8;
    int max_iterations = 500;
};

struct LmmFit {
    double intercept = 0.0;
    double estimate = 0.0; ///< b1: model 1 minus model 0
    double standard_error = 0.0;
    double z = 0.0;
    double p = 1.0; ///< two-sided, normal approximation
    double var_subject = 0.0;
    double var_roi = 0.0;
    double var_residual = 0.0;
    double reml_deviance = 0.0;
    bool converged = false;
    int iterations = 0;
};

LmmFit lmm_crossed(std::span<const ScoreRow> rows, const LmmOptions& options = {});

/// Rows for A (model 1) versus B (model 0), subject x ROI matrices.
std::vector<ScoreRow> model_rows(const Matrix& a, const Matrix& b);

} // namespace brainalign::stats
