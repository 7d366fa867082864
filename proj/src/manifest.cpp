#include "brainalign/manifest.hpp"
#include "brainalign/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace brainalign::io {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& network_labels()
{
    static const std::vector<std::string> labels = {"Vis",    "SomMot", "DorsAttn", "SalVentAttn",
                                                    "Limbic", "Cont",   "Default",  "Subcortex"};
    return labels;
}

std::vector<std::string> Atlas::networks() const
{
    std::vector<std::string> present;
    for (const auto& label : network_labels())
        if (std::any_of(rois.begin(), rois.end(), [&](const AtlasEntry& e) { return e.network == label; }))
            present.push_back(label);
    return present;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

std::string strip(std::string s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && s[b] == ' ')
        ++b;
    return s.substr(b);
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& p, const fs::path& base)
{
    if (base.empty())
        return p.generic_string();
    return fs::proximate(p, base).generic_string();
}

} // namespace

Atlas parse_atlas_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ManifestError("atlas: empty file");
    const auto header = split_csv_line(strip(line));
    if (header != std::vector<std::string>{"roi_id", "name", "network", "hemisphere"})
        throw ManifestError("atlas: header must be roi_id,name,network,hemisphere");

    Atlas atlas;
    while (std::getline(in, line)) {
        line = strip(line);
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4)
            throw ManifestError("atlas: expected 4 fields in line '" + line + "'");
        AtlasEntry e;
        try {
            e.roi_id = std::stoi(f[0]);
        } catch (const std::exception&) {
            throw ManifestError("atlas: bad roi_id '" + f[0] + "'");
        }
        e.name = f[1];
        e.network = f[2];
        e.hemisphere = f[3];
        const auto& labels = network_labels();
        if (std::find(labels.begin(), labels.end(), e.network) == labels.end())
            throw ManifestError("atlas: unknown network label '" + e.network + "'");
        atlas.rois.push_back(std::move(e));
    }
    std::sort(atlas.rois.begin(), atlas.rois.end(),
              [](const AtlasEntry& a, const AtlasEntry& b) { return a.roi_id < b.roi_id; });
    for (std::size_t i = 0; i < atlas.rois.size(); ++i)
        if (atlas.rois[i].roi_id != static_cast<int>(i))
            throw ManifestError("atlas: roi ids must be unique and dense from 0");
    if (atlas.rois.empty())
        throw ManifestError("atlas: no ROIs");
    return atlas;
}

Atlas read_atlas_csv(const fs::path& path) { return parse_atlas_csv(read_file(path)); }

std::string format_atlas_csv(const Atlas& atlas)
{
    std::string out = "roi_id,name,network,hemisphere\n";
    for (const auto& e : atlas.rois)
        out += std::to_string(e.roi_id) + "," + e.name + "," + e.network + "," + e.hemisphere + "\n";
    return out;
}

std::vector<WordRecord> parse_word_records(const std::string& jsonl)
{
    std::vector<WordRecord> words;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (strip(line).empty())
            continue;
        try {
            const auto j = json::parse(line);
            words.push_back({j.at("word").get<std::string>(), j.at("onset_sec").get<double>(),
                             j.at("run_id").get<int>(), j.at("word_index").get<std::size_t>()});
        } catch (const json::exception& e) {
            throw ManifestError(std::string("word records: ") + e.what());
        }
    }
    return words;
}

std::vector<WordRecord> read_word_records(const fs::path& path) { return parse_word_records(read_file(path)); }

std::string format_word_records(const std::vector<WordRecord>& words)
{
    std::string out;
    for (const auto& w : words) {
        json j;
        j["word"] = w.word;
        j["onset_sec"] = w.onset_sec;
        j["run_id"] = w.run_id;
        j["word_index"] = w.word_index;
        out += j.dump() + "\n";
    }
    return out;
}

namespace {

struct Parsed {
    DatasetManifest manifest;
    Atlas atlas;
    std::vector<WordRecord> words;
    std::vector<Matrix> features;
    std::vector<std::vector<Matrix>> bold;
};

Tensor read_checked(const fs::path& path, const std::string& what)
{
    if (!fs::exists(path))
        throw ManifestError(what + ": missing file " + path.string());
    return read_tensor(path);
}

Parsed parse_and_validate(const fs::path& path, bool keep_data)
{
    if (!fs::exists(path))
        throw ManifestError("manifest: missing file " + path.string());
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ManifestError(std::string("manifest: ") + e.what());
    }

    Parsed out;
    auto& m = out.manifest;
    m.base_dir = path.parent_path();
    try {
        m.language = j.at("language").get<std::string>();
        m.subjects = j.at("subjects").get<std::vector<std::string>>();
        for (const auto& r : j.at("runs")) {
            RunSpec run;
            run.id = r.at("id").get<int>();
            run.tr = r.at("tr").get<double>();
            run.n_tr = r.at("n_tr").get<std::size_t>();
            for (const auto& [subject, p] : r.at("bold").items())
                run.bold[subject] = resolve(m.base_dir, p.get<std::string>());
            m.runs.push_back(std::move(run));
        }
        m.atlas = resolve(m.base_dir, j.at("atlas").get<std::string>());
        std::vector<std::pair<int, fs::path>> layers;
        for (const auto& f : j.at("features"))
            layers.emplace_back(f.at("layer").get<int>(), resolve(m.base_dir, f.at("path").get<std::string>()));
        std::sort(layers.begin(), layers.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].first != static_cast<int>(i) + 1)
                throw ManifestError("manifest: feature layers must be contiguous starting at 1");
            m.features.push_back(layers[i].second);
        }
        m.words = resolve(m.base_dir, j.at("words").get<std::string>());
        if (j.contains("tokens")) {
            const auto& t = j.at("tokens");
            m.tokens = TokenFiles{resolve(m.base_dir, t.at("surprisal").get<std::string>()),
                                  resolve(m.base_dir, t.at("alignment").get<std::string>())};
        }
    } catch (const json::exception& e) {
        throw ManifestError(std::string("manifest: ") + e.what());
    }

    if (m.language.empty())
        throw ManifestError("manifest: empty language tag");
    if (m.subjects.empty())
        throw ManifestError("manifest: no subjects");
    if (std::set<std::string>(m.subjects.begin(), m.subjects.end()).size() != m.subjects.size())
        throw ManifestError("manifest: duplicate subject ids");
    if (m.runs.empty())
        throw ManifestError("manifest: no runs");
    if (m.features.empty())
        throw ManifestError("manifest: no feature layers");

    if (!fs::exists(m.atlas))
        throw ManifestError("atlas: missing file " + m.atlas.string());
    out.atlas = read_atlas_csv(m.atlas);
    const std::size_t n_roi = out.atlas.size();

    std::set<int> run_ids;
    for (const auto& run : m.runs) {
        const std::string tag = "run " + std::to_string(run.id);
        if (!run_ids.insert(run.id).second)
            throw ManifestError("manifest: duplicate " + tag);
        if (!(run.tr > 0.0))
            throw ManifestError(tag + ": TR must be > 0");
        if (run.n_tr == 0)
            throw ManifestError(tag + ": TR count must be >= 1");
    }

    out.bold.assign(m.subjects.size(), {});
    for (std::size_t s = 0; s < m.subjects.size(); ++s) {
        for (const auto& run : m.runs) {
            const std::string tag = "run " + std::to_string(run.id) + " subject " + m.subjects[s];
            const auto it = run.bold.find(m.subjects[s]);
            if (it == run.bold.end())
                throw ManifestError(tag + ": no bold file");
            Matrix bold = to_matrix(read_checked(it->second, tag));
            if (static_cast<std::size_t>(bold.rows()) != run.n_tr)
                throw ManifestError(tag + ": bold has " + std::to_string(bold.rows()) + " rows but run declares " +
                                    std::to_string(run.n_tr) + " TRs");
            if (static_cast<std::size_t>(bold.cols()) != n_roi)
                throw ManifestError(tag + ": bold ROI count does not match atlas");
            if (keep_data)
                out.bold[s].push_back(std::move(bold));
        }
    }

    if (!fs::exists(m.words))
        throw ManifestError("words: missing file " + m.words.string());
    out.words = read_word_records(m.words);
    std::vector<bool> seen(out.words.size(), false);
    for (const auto& w : out.words) {
        if (w.word_index >= out.words.size() || seen[w.word_index])
            throw ManifestError("words: word_index values must be unique and dense from 0");
        seen[w.word_index] = true;
        const auto run = std::find_if(m.runs.begin(), m.runs.end(), [&](const RunSpec& r) { return r.id == w.run_id; });
        if (run == m.runs.end())
            throw ManifestError("words: unknown run_id " + std::to_string(w.run_id));
        if (!(w.onset_sec >= 0.0 && w.onset_sec < run->tr * static_cast<double>(run->n_tr)))
            throw ManifestError("words: onset outside run for word " + std::to_string(w.word_index));
    }
    std::sort(out.words.begin(), out.words.end(),
              [](const WordRecord& a, const WordRecord& b) { return a.word_index < b.word_index; });

    for (std::size_t l = 0; l < m.features.size(); ++l) {
        const std::string tag = "layer " + std::to_string(l + 1);
        Matrix f = to_matrix(read_checked(m.features[l], tag));
        if (static_cast<std::size_t>(f.rows()) != out.words.size())
            throw ManifestError(tag + ": feature rows do not match word count");
        if (!all_finite(f))
            throw ManifestError(tag + ": non-finite feature values");
        if (keep_data)
            out.features.push_back(std::move(f));
    }

    if (m.tokens) {
        const Tensor t = read_checked(m.tokens->surprisal, "tokens");
        if (t.shape.size() != 2 || t.shape[1] != m.features.size())
            throw ManifestError("tokens: surprisal matrix must be tokens x layers");
        if (!fs::exists(m.tokens->alignment))
            throw ManifestError("tokens: missing file " + m.tokens->alignment.string());
    }
    return out;
}

} // namespace

DatasetManifest load_manifest(const fs::path& path) { return parse_and_validate(path, false).manifest; }

void write_manifest(const DatasetManifest& m, const fs::path& path)
{
    const fs::path base = path.parent_path();
    json j;
    j["language"] = m.language;
    j["subjects"] = m.subjects;
    j["runs"] = json::array();
    for (const auto& run : m.runs) {
        json r;
        r["id"] = run.id;
        r["tr"] = run.tr;
        r["n_tr"] = run.n_tr;
        r["bold"] = json::object();
        for (const auto& [subject, p] : run.bold)
            r["bold"][subject] = relative_to(p, base);
        j["runs"].push_back(r);
    }
    j["atlas"] = relative_to(m.atlas, base);
    j["features"] = json::array();
    for (std::size_t l = 0; l < m.features.size(); ++l)
        j["features"].push_back({{"layer", l + 1}, {"path", relative_to(m.features[l], base)}});
    j["words"] = relative_to(m.words, base);
    if (m.tokens)
        j["tokens"] = {{"surprisal", relative_to(m.tokens->surprisal, base)},
                       {"alignment", relative_to(m.tokens->alignment, base)}};
    write_file(path, j.dump(2) + "\n");
}

std::vector<WordRecord> Dataset::run_words(int run_id) const
{
    std::vector<WordRecord> out;
    for (const auto& w : words)
        if (w.run_id == run_id)
            out.push_back(w);
    return out;
}

Dataset load_dataset(const fs::path& manifest_path)
{
    Parsed p = parse_and_validate(manifest_path, true);
    Dataset d;
    d.language = p.manifest.language;
    d.subjects = p.manifest.subjects;
    for (const auto& run : p.manifest.runs) {
        d.run_ids.push_back(run.id);
        d.run_tr.push_back(run.tr);
        d.run_n_tr.push_back(run.n_tr);
    }
    d.atlas = std::move(p.atlas);
    d.words = std::move(p.words);
    d.features = std::move(p.features);
    d.bold = std::move(p.bold);
    return d;
}

fs::path write_dataset(const Dataset& d, const fs::path& dir, const std::optional<TokenFiles>& tokens)
{
    fs::create_directories(dir);
    DatasetManifest m;
    m.language = d.language;
    m.subjects = d.subjects;
    m.atlas = dir / "atlas.csv";
    write_file(m.atlas, format_atlas_csv(d.atlas));
    m.words = dir / "words.jsonl";
    write_file(m.words, format_word_records(d.words));
    for (std::size_t l = 0; l < d.features.size(); ++l) {
        char name[32];
        std::snprintf(name, sizeof(name), "layer-%02zu.enc", l + 1);
        m.features.push_back(dir / "features" / name);
        write_matrix(d.features[l], m.features.back());
    }
    for (std::size_t r = 0; r < d.run_ids.size(); ++r) {
        RunSpec run;
        run.id = d.run_ids[r];
        run.tr = d.run_tr[r];
        run.n_tr = d.run_n_tr[r];
        for (std::size_t s = 0; s < d.subjects.size(); ++s) {
            const fs::path p = dir / "bold" / (d.subjects[s] + "_run-" + std::to_string(run.id) + ".enc");
            write_matrix(d.bold[s][r], p);
            run.bold[d.subjects[s]] = p;
        }
        m.runs.push_back(std::move(run));
    }
    m.tokens = tokens;
    const fs::path manifest_path = dir / "manifest.json";
    write_manifest(m, manifest_path);
    return manifest_path;
}

} // namespace brainalign::io
