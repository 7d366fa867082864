#include "brainalign/design.hpp"

#include <cmath>

namespace brainalign::design {

namespace {

double gamma_pdf(double t, double shape)
{
    if (t <= 0.0)
        return 0.0;
    return std::exp((shape - 1.0) * std::log(t) - t - std::lgamma(shape));
}

} // namespace

double double_gamma(double t) { return gamma_pdf(t, 6.0) - gamma_pdf(t, 16.0) / 6.0; }

Index HrfKernel::peak_index() const
{
    Index idx = 0;
    samples.maxCoeff(&idx);
    return idx;
}

HrfKernel hrf_kernel(double sample_period, double support)
{
    if (!(sample_period > 0.0 && sample_period <= 0.1))
        throw std::invalid_argument("hrf_kernel: sample period must be in (0, 0.1]");
    if (!(support >= 24.0))
        throw std::invalid_argument("hrf_kernel: support must be >= 24 s");

    HrfKernel k;
    k.sample_period = sample_period;
    k.support = support;
    const auto n = static_cast<Index>(std::floor(support / sample_period + 1e-9)) + 1;
    k.samples.resize(n);
    for (Index i = 0; i < n; ++i)
        k.samples(i) = double_gamma(static_cast<double>(i) * sample_period);
    k.samples /= k.samples.maxCoeff();
    return k;
}

Matrix impulse_response_weights(std::span<const double> onsets, double tr, std::size_t n_tr, const HrfKernel& kernel)
{
    if (!(tr > 0.0))
        throw std::invalid_argument("build_design: TR must be > 0");
    const double run_length = tr * static_cast<double>(n_tr);
    const double dt = kernel.sample_period;
    const Index kernel_len = kernel.samples.size();

    Matrix weights = Matrix::Zero(static_cast<Index>(n_tr), static_cast<Index>(onsets.size()));
    for (std::size_t w = 0; w < onsets.size(); ++w) {
        const double onset = onsets[w];
        if (!(onset >= 0.0 && onset < run_length))
            throw std::invalid_argument("build_design: onset outside run");
        const long long impulse = std::llround(onset / dt);
        for (std::size_t k = 0; k < n_tr; ++k) {
            const long long lag = std::llround(static_cast<double>(k) * tr / dt) - impulse;
            if (lag >= 0 && lag < kernel_len)
                weights(static_cast<Index>(k), static_cast<Index>(w)) = kernel.samples(lag);
        }
    }
    return weights;
}

Matrix build_design(const Eigen::Ref<const Matrix>& features, std::span<const double> onsets, double tr,
                    std::size_t n_tr, const HrfKernel& kernel)
{
    if (static_cast<std::size_t>(features.rows()) != onsets.size())
        throw std::invalid_argument("build_design: feature rows must equal word count");
    return impulse_response_weights(onsets, tr, n_tr, kernel) * features;
}

Matrix build_design(const Eigen::Ref<const Matrix>& features, std::span<const io::WordRecord> words, double tr,
                    std::size_t n_tr, const HrfKernel& kernel)
{
    std::vector<double> onsets;
    onsets.reserve(words.size());
    for (const auto& w : words)
        onsets.push_back(w.onset_sec);
    return build_design(features, onsets, tr, n_tr, kernel);
}

std::vector<DesignMatrix> dataset_designs(const io::Dataset& dataset, int layer, const HrfKernel& kernel)
{
    if (layer < 1 || static_cast<std::size_t>(layer) > dataset.layer_count())
        throw std::invalid_argument("dataset_designs: layer out of range");
    const Matrix& features = dataset.features[static_cast<std::size_t>(layer - 1)];

    std::vector<DesignMatrix> designs;
    for (std::size_t r = 0; r < dataset.run_ids.size(); ++r) {
        const auto words = dataset.run_words(dataset.run_ids[r]);
        Matrix rows(static_cast<Index>(words.size()), features.cols());
        for (std::size_t i = 0; i < words.size(); ++i)
            rows.row(static_cast<Index>(i)) = features.row(static_cast<Index>(words[i].word_index));
        designs.push_back({build_design(rows, std::span<const io::WordRecord>(words), dataset.run_tr[r],
                                        dataset.run_n_tr[r], kernel),
                           dataset.run_ids[r], layer});
    }
    return designs;
}

} // namespace brainalign::design
