#include "brainalign/surprisal.hpp"
#include "brainalign/io.hpp"
#include "brainalign/ridge.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace brainalign::surprisal {

void TokenTable::validate() const
{
    if (alignment.size() != static_cast<std::size_t>(surprisal.rows()))
        throw ConfigError("token table: one alignment record per token required");
    for (std::size_t i = 0; i < alignment.size(); ++i)
        if (alignment[i].token_index != i)
            throw ConfigError("token table: alignment must list tokens in order");
    if (!all_finite(surprisal) || (surprisal.size() > 0 && surprisal.minCoeff() < 0.0))
        throw ConfigError("token table: surprisal values must be finite and >= 0");
}

TokenTable read_token_table(const std::filesystem::path& matrix_path, const std::filesystem::path& alignment_path)
{
    TokenTable table;
    table.surprisal = io::read_matrix(matrix_path);
    std::istringstream in(io::read_file(alignment_path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \r\t") == std::string::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            table.alignment.push_back({j.at("token_index").get<std::size_t>(), j.at("word_index").get<std::size_t>(),
                                       j.at("run_id").get<int>(), j.at("sentence_id").get<int>(),
                                       j.at("position").get<int>()});
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("token alignment: ") + e.what());
        }
    }
    table.validate();
    return table;
}

void write_token_table(const TokenTable& table, const std::filesystem::path& matrix_path,
                       const std::filesystem::path& alignment_path)
{
    table.validate();
    io::write_matrix(table.surprisal, matrix_path);
    std::string out;
    for (const auto& t : table.alignment) {
        nlohmann::json j;
        j["token_index"] = t.token_index;
        j["word_index"] = t.word_index;
        j["run_id"] = t.run_id;
        j["sentence_id"] = t.sentence_id;
        j["position"] = t.position;
        out += j.dump() + "\n";
    }
    io::write_file(alignment_path, out);
}

SurprisalTable aggregate_word_surprisal(const TokenTable& tokens)
{
    tokens.validate();
    if (tokens.alignment.empty())
        throw std::invalid_argument("aggregate_word_surprisal: empty token table");
    std::size_t n_words = 0;
    for (const auto& t : tokens.alignment)
        n_words = std::max(n_words, t.word_index + 1);

    SurprisalTable out;
    out.values = Matrix::Zero(static_cast<Index>(n_words), tokens.surprisal.cols());
    out.run_ids.assign(n_words, 0);
    std::vector<std::size_t> token_count(n_words, 0);
    for (const auto& t : tokens.alignment) {
        out.values.row(static_cast<Index>(t.word_index)) += tokens.surprisal.row(static_cast<Index>(t.token_index));
        if (token_count[t.word_index]++ == 0)
            out.run_ids[t.word_index] = t.run_id;
        else if (out.run_ids[t.word_index] != t.run_id)
            throw std::invalid_argument("aggregate_word_surprisal: word " + std::to_string(t.word_index) +
                                        " spans several runs");
    }
    for (std::size_t w = 0; w < n_words; ++w)
        if (token_count[w] == 0)
            throw std::invalid_argument("aggregate_word_surprisal: word " + std::to_string(w) +
                                        " has no aligned tokens");
    return out;
}

Vector layer_mean_surprisal(const SurprisalTable& table)
{
    if (table.values.rows() == 0)
        throw std::invalid_argument("layer_mean_surprisal: empty table");
    return table.values.colwise().mean().transpose();
}

RunProfile run_profile(const SurprisalTable& table)
{
    RunProfile profile;
    std::map<int, std::pair<Vector, std::size_t>> acc;
    for (Index w = 0; w < table.values.rows(); ++w) {
        auto [it, inserted] = acc.try_emplace(table.run_ids[static_cast<std::size_t>(w)],
                                              Vector::Zero(table.values.cols()), 0);
        it->second.first += table.values.row(w).transpose();
        ++it->second.second;
    }
    profile.means.resize(static_cast<Index>(acc.size()), table.values.cols());
    Index row = 0;
    for (const auto& [run, sum] : acc) {
        profile.runs.push_back(run);
        profile.means.row(row++) = sum.first.transpose() / static_cast<double>(sum.second);
    }
    return profile;
}

SurprisalConvergence surprisal_convergence(std::span<const SurprisalTable> languages)
{
    if (languages.size() < 2)
        throw std::invalid_argument("surprisal_convergence: need at least 2 languages");
    std::vector<RunProfile> profiles;
    for (const auto& table : languages)
        profiles.push_back(run_profile(table));
    const Index n_layers = languages.front().values.cols();
    for (const auto& table : languages)
        if (table.values.cols() != n_layers)
            throw std::invalid_argument("surprisal_convergence: layer counts differ");

    std::set<int> shared(profiles.front().runs.begin(), profiles.front().runs.end());
    for (const auto& p : profiles) {
        std::set<int> runs(p.runs.begin(), p.runs.end());
        std::set<int> both;
        std::set_intersection(shared.begin(), shared.end(), runs.begin(), runs.end(), std::inserter(both, both.end()));
        shared = std::move(both);
    }
    if (shared.size() < 2)
        throw std::invalid_argument("surprisal_convergence: fewer than 2 runs shared by all languages");

    SurprisalConvergence out;
    out.shared_runs.assign(shared.begin(), shared.end());
    for (const auto& p : profiles) {
        Matrix m(static_cast<Index>(shared.size()), n_layers);
        for (std::size_t k = 0; k < out.shared_runs.size(); ++k) {
            const auto pos = std::find(p.runs.begin(), p.runs.end(), out.shared_runs[k]) - p.runs.begin();
            m.row(static_cast<Index>(k)) = p.means.row(pos);
        }
        out.run_means.push_back(std::move(m));
    }

    auto& c = out.correlation;
    c.layers.resize(static_cast<std::size_t>(n_layers));
    for (Index l = 0; l < n_layers; ++l)
        c.layers[static_cast<std::size_t>(l)] = static_cast<int>(l) + 1;
    c.pairs = maps::language_pairs(languages.size());
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    c.pairwise = Matrix::Constant(n_layers, static_cast<Index>(c.pairs.size()), kNaN);
    c.mean_abs = Vector::Constant(n_layers, kNaN);
    c.abs_mean = Vector::Constant(n_layers, kNaN);
    for (Index l = 0; l < n_layers; ++l) {
        double sum = 0.0, sum_abs = 0.0;
        std::size_t count = 0;
        for (std::size_t p = 0; p < c.pairs.size(); ++p) {
            const double r = encoder::pearson(out.run_means[c.pairs[p][0]].col(l), out.run_means[c.pairs[p][1]].col(l));
            c.pairwise(l, static_cast<Index>(p)) = r;
            if (std::isfinite(r)) {
                sum += r;
                sum_abs += std::fabs(r);
                ++count;
            }
        }
        if (count > 0) {
            c.abs_mean(l) = std::fabs(sum / static_cast<double>(count));
            c.mean_abs(l) = sum_abs / static_cast<double>(count);
        }
    }
    return out;
}

} // namespace brainalign::surprisal
