#include "app.hpp"
#include "plots.hpp"

#include "brainalign/design.hpp"
#include "brainalign/encoder.hpp"
#include "brainalign/geometry.hpp"
#include "brainalign/groupstats.hpp"
#include "brainalign/io.hpp"
#include "brainalign/manifest.hpp"
#include "brainalign/maps.hpp"
#include "brainalign/simulate.hpp"
#include "brainalign/surprisal.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace brainalign::app {

namespace {

std::string join(std::initializer_list<std::string> cells)
{
    std::string out;
    for (const auto& c : cells) {
        if (!out.empty())
            out += ',';
        out += c;
    }
    return out + "\n";
}

std::string layer_tag(int layer)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "layer-%02d", layer);
    return buf;
}

std::string fmt(double v) { return format_double(v); }

void record_tree(Context& ctx, const fs::path& dir)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto name = f.filename().string();
        if (name != ".brainalign.lock" && name != "provenance.json")
            ctx.record(f);
    }
}

encoder::ScoreTensor load_scores(Context& ctx, const fs::path& path)
{
    auto tensor = encoder::read_score_tensor(path);
    std::string stem = path.string();
    for (const std::string suffix : {".folds.enc", ".enc", ".json"})
        if (stem.size() > suffix.size() && stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
            stem.resize(stem.size() - suffix.size());
            break;
        }
    ctx.input(stem + ".enc");
    ctx.input(stem + ".json");
    return tensor;
}

io::Dataset load_dataset(Context& ctx, const fs::path& manifest)
{
    ctx.input(manifest);
    return io::load_dataset(manifest);
}

double probability(Params& p, const std::string& key, double fallback)
{
    const double q = p.get<double>(key, fallback);
    if (!(q > 0.0 && q < 1.0))
        throw ConfigError("parameter '" + key + "' must lie in (0, 1)");
    return q;
}

int ddof_param(Params& p)
{
    const int ddof = p.get<int>("t_ddof", 0);
    if (ddof != 0 && ddof != 1)
        throw ConfigError("parameter 't_ddof' must be 0 or 1");
    return ddof;
}

stats::SignFlipOptions signflip_options(Context& ctx, stats::Sidedness sidedness)
{
    stats::SignFlipOptions o;
    o.sidedness = sidedness;
    o.n_perm = ctx.params.get<std::size_t>("n_perm", o.n_perm);
    o.seed = ctx.seed;
    o.threads = ctx.threads;
    const auto mode = ctx.params.get<std::string>("permutation_mode", "auto");
    if (mode == "auto")
        o.mode = stats::PermutationMode::Auto;
    else if (mode == "exact")
        o.mode = stats::PermutationMode::Exact;
    else if (mode == "monte-carlo")
        o.mode = stats::PermutationMode::MonteCarlo;
    else
        throw ConfigError("permutation_mode must be auto, exact or monte-carlo");
    return o;
}

/// Requested layer, or the only one when the tensor has a single layer.
int pick_layer(Params& p, const std::string& key, const encoder::ScoreTensor& t)
{
    if (!p.has(key)) {
        p.get<int>(key, 0);
        if (t.layers.size() != 1)
            throw ConfigError("parameter '" + key + "' is required for tensors with several layers");
        return t.layers.front();
    }
    const int layer = p.require<int>(key);
    t.layer_position(layer);
    return layer;
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::string matrix_csv(const std::string& corner, const std::vector<int>& ids, const Matrix& m)
{
    std::string out = corner;
    for (int id : ids)
        out += "," + std::to_string(id);
    out += "\n";
    for (Index i = 0; i < m.rows(); ++i) {
        out += std::to_string(ids[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < m.cols(); ++j)
            out += "," + fmt(m(i, j));
        out += "\n";
    }
    return out;
}

std::string convergence_csv(const maps::Convergence& c, const std::vector<std::string>& languages)
{
    std::string out = "layer";
    for (const auto& pair : c.pairs)
        out += ",r_" + languages[pair[0]] + "_" + languages[pair[1]];
    out += ",mean_abs_r,abs_mean_r\n";
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
        const Index li = static_cast<Index>(l);
        out += std::to_string(c.layers[l]);
        for (Index p = 0; p < c.pairwise.cols(); ++p)
            out += "," + fmt(c.pairwise(li, p));
        out += "," + fmt(c.mean_abs(li)) + "," + fmt(c.abs_mean(li)) + "\n";
    }
    return out;
}

std::vector<Series> convergence_series(const maps::Convergence& c)
{
    Series mean_abs{"mean |r|", {}}, abs_mean{"|mean r|", {}};
    for (Index l = 0; l < c.mean_abs.size(); ++l) {
        mean_abs.y.push_back(c.mean_abs(l));
        abs_mean.y.push_back(c.abs_mean(l));
    }
    return {mean_abs, abs_mean};
}

} // namespace

void cmd_simulate(Context& ctx)
{
    auto& p = ctx.params;
    sim::SimConfig c;
    c.seed = ctx.seed;
    c.language = p.get("language", c.language);
    c.subjects = p.get("subjects", c.subjects);
    c.runs = p.get("runs", c.runs);
    c.trs_per_run = p.get("trs_per_run", c.trs_per_run);
    c.rois = p.get("rois", c.rois);
    c.feature_dims = p.get("feature_dims", c.feature_dims);
    c.layers = p.get("layers", c.layers);
    c.signal_rois = p.get("signal_rois", c.signal_rois);
    c.effects = p.get("effects", c.effects);
    c.effect = p.get("effect", c.effect);
    c.noise_sd = p.get("noise_sd", c.noise_sd);
    c.null_sd = p.get("null_sd", c.null_sd);
    c.tr = p.get("tr", c.tr);
    c.word_rate = p.get("word_rate", c.word_rate);
    c.signal_layer = p.get("signal_layer", c.signal_layer);
    c.layer_correlation = p.get("layer_correlation", c.layer_correlation);
    c.ar1 = p.get("ar1", c.ar1);
    c.tokens = p.get("tokens", c.tokens);

    if (p.has("three_languages")) {
        const auto& layout = p.raw("three_languages");
        const auto shared = layout.value("shared", std::vector<int>{});
        const auto priv = layout.value("private", std::vector<std::vector<int>>(3));
        if (priv.size() != 3)
            throw ConfigError("three_languages.private must list 3 ROI sets");
        p.finish();
        const auto sims = sim::synth_three_languages(c, shared, {priv[0], priv[1], priv[2]});
        parallel_for(3, ctx.threads,
                     [&](std::size_t i) { sim::write_simulation(sims[i], ctx.out / sims[i].dataset.language); });
    } else {
        p.finish();
        sim::write_simulation(sim::synth_dataset(c), ctx.out);
    }
    record_tree(ctx, ctx.out);
}

void cmd_design(Context& ctx)
{
    auto& p = ctx.params;
    const auto manifest = p.path("manifest");
    auto layers = p.get<std::vector<int>>("layers", {});
    const auto kernel = design::hrf_kernel(p.get("hrf_period", design::kGridPeriod),
                                           p.get("hrf_support", design::kDefaultSupport));
    p.finish();
    const auto ds = load_dataset(ctx, manifest);
    if (layers.empty()) {
        layers.resize(ds.layer_count());
        std::iota(layers.begin(), layers.end(), 1);
    }
    std::vector<std::vector<design::DesignMatrix>> designs(layers.size());
    parallel_for(layers.size(), ctx.threads,
                 [&](std::size_t l) { designs[l] = design::dataset_designs(ds, layers[l], kernel); });
    for (const auto& per_layer : designs)
        for (const auto& d : per_layer) {
            char name[64];
            std::snprintf(name, sizeof name, "design/%s_run-%02d.enc", layer_tag(d.layer).c_str(), d.run_id);
            ctx.write(name, io::encode(io::to_tensor(d.values)));
        }
}

void cmd_encode(Context& ctx)
{
    auto& p = ctx.params;
    const auto manifest = p.path("manifest");
    const auto layers = p.get<std::vector<int>>("layers", {});
    encoder::RidgeConfig rc;
    rc.alphas = p.get("alphas", rc.alphas);
    for (const auto& b : p.get<std::vector<std::array<Index, 2>>>("bands", {}))
        rc.bands.push_back({b[0], b[1]});
    const auto inner = p.get<std::string>("inner_cv", "loro");
    if (inner == "loro")
        rc.inner = encoder::InnerCv::LeaveOneRunOut;
    else if (inner == "none")
        rc.inner = encoder::InnerCv::None;
    else
        throw ConfigError("inner_cv must be 'loro' or 'none'");
    p.finish();

    const auto ds = load_dataset(ctx, manifest);
    const auto tensor = encoder::encode_dataset(ds, rc, layers, ctx.threads);
    encoder::write_score_tensor(tensor, ctx.out / "scores");
    for (const char* f : {"scores.enc", "scores.folds.enc", "scores.json"})
        ctx.record(ctx.out / f);

    std::string csv = "subject,layer,roi_id,score\n";
    for (std::size_t s = 0; s < tensor.subject_count(); ++s)
        for (std::size_t l = 0; l < tensor.layer_count(); ++l)
            for (std::size_t r = 0; r < tensor.n_roi; ++r)
                csv += join({tensor.subjects[s], std::to_string(tensor.layers[l]), std::to_string(r),
                             fmt(tensor.score(s, l, r))});
    ctx.write("scores.csv", csv);

    if (ctx.plots) {
        const Matrix gm = tensor.group_mean();
        Series mean{"mean over ROIs", {}}, best{"max over ROIs", {}};
        for (Index l = 0; l < gm.rows(); ++l) {
            mean.y.push_back(gm.row(l).mean());
            best.y.push_back(gm.row(l).maxCoeff());
        }
        ctx.write("plots/scores.svg", line_plot("Brain score by layer (" + tensor.language + ")", "layer",
                                                "Pearson r", as_doubles(tensor.layers), {mean, best}));
    }
}

void cmd_group_map(Context& ctx)
{
    auto& p = ctx.params;
    const auto path = p.path("scores");
    auto layers = p.get<std::vector<int>>("layers", {});
    const double q = probability(p, "q", 0.05);
    const int ddof = ddof_param(p);
    p.finish();

    const auto tensor = load_scores(ctx, path);
    if (layers.empty())
        layers = tensor.layers;
    Matrix masked(static_cast<Index>(layers.size()), static_cast<Index>(tensor.n_roi));
    Matrix group(masked.rows(), masked.cols());
    std::string summary = "layer,n_significant,mean_score,max_score\n";
    std::vector<double> counts;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto map = stats::significance_map(tensor, layers[l], q, ddof);
        const std::string tag = "statmap/" + layer_tag(layers[l]);
        ctx.write(tag + ".csv", stats::format_statmap_csv(map));
        ctx.write(tag + ".json", stats::format_statmap_descriptor(map));
        masked.row(static_cast<Index>(l)) = map.masked_mean.transpose();
        group.row(static_cast<Index>(l)) = map.group_mean.transpose();
        summary += join({std::to_string(layers[l]), std::to_string(map.significant_count()),
                         fmt(map.group_mean.mean()), fmt(map.group_mean.maxCoeff())});
        counts.push_back(static_cast<double>(map.significant_count()));
    }
    ctx.write("summary.csv", summary);
    ctx.write("masked.enc", io::encode(io::to_tensor(masked)));
    ctx.write("group_mean.enc", io::encode(io::to_tensor(group)));
    if (ctx.plots)
        ctx.write("plots/significant.svg", line_plot("Significant ROIs (" + tensor.language + ")", "layer",
                                                     "ROIs", as_doubles(layers), {{"FDR q=" + fmt(q), counts}}));
}

void cmd_layer_compare(Context& ctx)
{
    auto& p = ctx.params;
    const auto path = p.path("scores");
    const double q = probability(p, "q", 0.05);
    const auto options = signflip_options(ctx, stats::Sidedness::TwoSided);
    p.finish();

    const auto tensor = load_scores(ctx, path);
    const Matrix fractions = stats::layer_pair_fractions(tensor, q, options);
    ctx.write("layer_fractions.csv", matrix_csv("layer", tensor.layers, fractions));
}

void cmd_model_compare(Context& ctx)
{
    auto& p = ctx.params;
    const auto path_a = p.path("scores_a");
    const auto path_b = p.path("scores_b");
    const double q = probability(p, "q", 0.05);
    const auto sidedness = stats::parse_sidedness(p.get<std::string>("sidedness", "two-sided"));
    const auto options = signflip_options(ctx, sidedness);
    const bool lmm = p.get("lmm", true);
    const auto a = load_scores(ctx, path_a);
    const auto b = load_scores(ctx, path_b);
    const int layer_a = pick_layer(p, "layer_a", a);
    const int layer_b = pick_layer(p, "layer_b", b);
    p.finish();

    if (a.subjects != b.subjects || a.n_roi != b.n_roi)
        throw ConfigError("model-compare: score tensors must share subjects and ROIs");
    const Matrix sa = a.layer_scores(a.layer_position(layer_a));
    const Matrix sb = b.layer_scores(b.layer_position(layer_b));
    const auto map = stats::model_compare(sa, sb, q, options);
    ctx.write("model_compare.csv", stats::format_statmap_csv(map));
    ctx.write("model_compare.json", stats::format_statmap_descriptor(map));

    if (lmm) {
        const auto rows = stats::model_rows(sa, sb);
        const auto fit = stats::lmm_crossed(rows);
        nlohmann::json j;
        j["model"] = "score ~ model + (1|subject) + (1|roi)";
        j["method"] = "REML";
        j["estimate"] = fit.estimate;
        j["intercept"] = fit.intercept;
        j["standard_error"] = fit.standard_error;
        j["z"] = fit.z;
        j["p"] = fit.p;
        j["var_subject"] = fit.var_subject;
        j["var_roi"] = fit.var_roi;
        j["var_residual"] = fit.var_residual;
        j["reml_deviance"] = fit.reml_deviance;
        j["converged"] = fit.converged;
        j["iterations"] = fit.iterations;
        ctx.write("lmm.json", j.dump(2) + "\n");
    }
}

namespace {

std::vector<encoder::ScoreTensor> load_many(Context& ctx, const std::string& key, std::size_t min_count,
                                            std::size_t max_count)
{
    const auto paths = ctx.params.paths(key);
    if (paths.size() < min_count || paths.size() > max_count)
        throw ConfigError("parameter '" + key + "' must list between " + std::to_string(min_count) + " and " +
                          std::to_string(max_count) + " score tensors");
    std::vector<encoder::ScoreTensor> out;
    for (const auto& path : paths)
        out.push_back(load_scores(ctx, path));
    for (const auto& t : out)
        if (t.n_roi != out.front().n_roi)
            throw ConfigError("parameter '" + key + "': tensors cover different ROI sets");
    return out;
}

std::vector<std::string> languages_of(const std::vector<encoder::ScoreTensor>& tensors)
{
    std::vector<std::string> names;
    for (const auto& t : tensors)
        names.push_back(t.language);
    return names;
}

} // namespace

void cmd_overlap(Context& ctx)
{
    auto& p = ctx.params;
    const auto tensors = load_many(ctx, "scores", 3, 3);
    const double q = probability(p, "q", 0.05);
    const int ddof = ddof_param(p);
    std::vector<int> layer(3);
    for (std::size_t i = 0; i < 3; ++i)
        layer[i] = pick_layer(p, "layer", tensors[i]);
    p.finish();

    std::vector<std::vector<bool>> masks;
    for (std::size_t i = 0; i < 3; ++i)
        masks.push_back(stats::significance_map(tensors[i], layer[i], q, ddof).significant);
    const auto map = maps::overlap_categories(masks[0], masks[1], masks[2]);
    const auto coarse = map.coarse_mode();

    std::string csv = "roi_id,category,coarse_category\n";
    for (std::size_t r = 0; r < map.category.size(); ++r)
        csv += join({std::to_string(r), std::string(maps::overlap_name(map.category[r])),
                     std::string(maps::coarse_overlap_name(coarse[r]))});
    ctx.write("overlap.csv", csv);

    const auto counts = map.counts();
    std::string summary = "category,count\n";
    std::vector<std::string> labels;
    std::vector<double> values;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const auto name = std::string(maps::overlap_name(static_cast<maps::Overlap>(c)));
        summary += join({name, std::to_string(counts[c])});
        labels.push_back(name);
        values.push_back(static_cast<double>(counts[c]));
    }
    ctx.write("overlap_counts.csv", summary);
    if (ctx.plots)
        ctx.write("plots/overlap.svg", bar_plot("Significant ROI overlap", "ROIs", labels, values));
}

void cmd_preferred_layer(Context& ctx)
{
    auto& p = ctx.params;
    const auto path = p.path("scores");
    const double q = probability(p, "q", 0.05);
    const int ddof = ddof_param(p);
    p.finish();

    const auto tensor = load_scores(ctx, path);
    const Matrix gm = tensor.group_mean();
    std::vector<std::vector<bool>> significant;
    for (int layer : tensor.layers)
        significant.push_back(stats::significance_map(tensor, layer, q, ddof).significant);
    const auto all = maps::preferred_layer(gm, tensor.layers);
    const auto sig = maps::preferred_layer_significant(gm, tensor.layers, significant);

    std::string csv = "roi_id,preferred_layer,score,significant_layer,significant_score\n";
    for (std::size_t r = 0; r < tensor.n_roi; ++r) {
        const Index ri = static_cast<Index>(r);
        csv += join({std::to_string(r), std::to_string(all.layer[r]), fmt(all.score(ri)),
                     std::to_string(sig.layer[r]), fmt(sig.score(ri))});
    }
    ctx.write("preferred_layer.csv", csv);

    if (ctx.plots) {
        std::vector<std::string> labels;
        std::vector<double> counts;
        for (int layer : tensor.layers) {
            labels.push_back(std::to_string(layer));
            counts.push_back(static_cast<double>(std::count(sig.layer.begin(), sig.layer.end(), layer)));
        }
        ctx.write("plots/preferred_layer.svg",
                  bar_plot("Preferred layer among significant ROIs (" + tensor.language + ")", "ROIs", labels,
                           counts));
    }
}

void cmd_networks(Context& ctx)
{
    auto& p = ctx.params;
    const auto path = p.path("scores");
    const auto atlas_path = p.path("atlas");
    p.finish();

    const auto tensor = load_scores(ctx, path);
    ctx.input(atlas_path);
    const auto atlas = io::read_atlas_csv(atlas_path);
    const auto profile = maps::network_profile(tensor, atlas);

    std::string csv = "network,layer,mean_score\n";
    std::vector<Series> series;
    for (std::size_t n = 0; n < profile.networks.size(); ++n) {
        Series s{profile.networks[n], {}};
        for (std::size_t l = 0; l < profile.layers.size(); ++l) {
            const double v = profile.values(static_cast<Index>(n), static_cast<Index>(l));
            csv += join({profile.networks[n], std::to_string(profile.layers[l]), fmt(v)});
            s.y.push_back(v);
        }
        series.push_back(std::move(s));
    }
    ctx.write("networks.csv", csv);
    if (ctx.plots) {
        std::vector<std::string> layer_names;
        for (int l : profile.layers)
            layer_names.push_back(std::to_string(l));
        ctx.write("plots/networks.svg", line_plot("Network profiles (" + tensor.language + ")", "layer",
                                                  "mean brain score", as_doubles(profile.layers), series));
        ctx.write("plots/networks_grid.svg", heat_grid("Layer x network mean score (" + tensor.language + ")",
                                                       profile.networks, layer_names, profile.values));
    }
}

void cmd_convergence(Context& ctx)
{
    auto& p = ctx.params;
    const auto tensors = load_many(ctx, "scores", 2, 16);
    const double q = probability(p, "q", 0.05);
    const int ddof = ddof_param(p);
    p.finish();

    const auto& layers = tensors.front().layers;
    for (const auto& t : tensors)
        if (t.layers != layers)
            throw ConfigError("convergence: tensors must hold the same layers");
    std::vector<Matrix> masked(tensors.size());
    parallel_for(tensors.size(), ctx.threads, [&](std::size_t i) {
        Matrix m(static_cast<Index>(layers.size()), static_cast<Index>(tensors[i].n_roi));
        for (std::size_t l = 0; l < layers.size(); ++l)
            m.row(static_cast<Index>(l)) = stats::significance_map(tensors[i], layers[l], q, ddof).masked_mean;
        masked[i] = std::move(m);
    });
    const auto c = maps::map_convergence(masked, layers);
    ctx.write("convergence.csv", convergence_csv(c, languages_of(tensors)));
    if (ctx.plots)
        ctx.write("plots/convergence.svg", line_plot("Cross-language map convergence", "layer", "Spearman r",
                                                     as_doubles(layers), convergence_series(c)));
}

void cmd_id(Context& ctx)
{
    auto& p = ctx.params;
    const auto manifest = p.path("manifest");
    auto layers = p.get<std::vector<int>>("layers", {});
    const auto max_points = p.get<std::size_t>("max_points", geometry::kDefaultMaxPoints);
    const auto group_by = p.get<std::string>("group_by", "run");
    const bool normalize = p.get("normalize", true);
    if (group_by != "run" && group_by != "none")
        throw ConfigError("group_by must be 'run' or 'none'");
    p.finish();

    const auto ds = load_dataset(ctx, manifest);
    if (layers.empty()) {
        layers.resize(ds.layer_count());
        std::iota(layers.begin(), layers.end(), 1);
    }
    std::vector<int> groups(ds.words.size(), 0);
    if (group_by == "run")
        for (const auto& w : ds.words)
            groups[w.word_index] = w.run_id;

    std::string csv = "language,layer,run,n_used,duplicates_removed,id,exceeds_ambient_bound\n";
    Series mean_id{"mean over groups", {}};
    for (int layer : layers) {
        if (layer < 1 || static_cast<std::size_t>(layer) > ds.layer_count())
            throw ConfigError("id: layer " + std::to_string(layer) + " not in the dataset");
        const Matrix& features = ds.features[static_cast<std::size_t>(layer - 1)];
        Matrix points = features;
        std::vector<int> kept_groups = groups;
        if (normalize) {
            auto unit = geometry::l2_normalize_rows(features);
            points = std::move(unit.points);
            kept_groups.clear();
            for (auto k : unit.kept)
                kept_groups.push_back(groups[k]);
        }
        const auto estimates = geometry::id_per_group(points, kept_groups, max_points, ctx.seed, ctx.threads);
        double sum = 0.0;
        for (const auto& g : estimates) {
            csv += join({ds.language, std::to_string(layer), group_by == "run" ? std::to_string(g.group) : "all",
                         std::to_string(g.estimate.n_used), std::to_string(g.estimate.duplicates_removed),
                         fmt(g.estimate.id), g.estimate.exceeds_ambient_bound ? "1" : "0"});
            sum += g.estimate.id;
        }
        mean_id.y.push_back(sum / static_cast<double>(estimates.size()));
    }
    ctx.write("id.csv", csv);
    if (ctx.plots)
        ctx.write("plots/id.svg", line_plot("Intrinsic dimension (" + ds.language + ")", "layer", "2NN ID",
                                            as_doubles(layers), {mean_id}));
}

void cmd_surprisal(Context& ctx)
{
    auto& p = ctx.params;
    const auto manifests = p.paths("manifests");
    p.finish();
    if (manifests.empty())
        throw ConfigError("surprisal: at least one manifest required");

    std::vector<surprisal::SurprisalTable> tables;
    std::vector<std::string> languages;
    for (const auto& path : manifests) {
        ctx.input(path);
        const auto m = io::load_manifest(path);
        if (!m.tokens)
            throw ConfigError("surprisal: manifest " + path.string() + " declares no token files");
        ctx.input(m.tokens->surprisal);
        ctx.input(m.tokens->alignment);
        tables.push_back(surprisal::aggregate_word_surprisal(
            surprisal::read_token_table(m.tokens->surprisal, m.tokens->alignment)));
        languages.push_back(m.language);
    }

    std::string csv = "language,layer,mean_surprisal\n";
    std::vector<Series> series;
    std::vector<double> x;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        const Vector means = surprisal::layer_mean_surprisal(tables[i]);
        Series s{languages[i], {}};
        for (Index l = 0; l < means.size(); ++l) {
            csv += join({languages[i], std::to_string(l + 1), fmt(means(l))});
            s.y.push_back(means(l));
            if (i == 0)
                x.push_back(static_cast<double>(l + 1));
        }
        series.push_back(std::move(s));
    }
    ctx.write("surprisal_means.csv", csv);
    if (ctx.plots)
        ctx.write("plots/surprisal.svg", line_plot("Layer-wise surprisal", "layer", "mean surprisal (nats)", x, series));

    if (tables.size() >= 2) {
        const auto c = surprisal::surprisal_convergence(tables);
        ctx.write("surprisal_convergence.csv", convergence_csv(c.correlation, languages));
    }
}

} // namespace brainalign::app
