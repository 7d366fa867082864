#include "app.hpp"
#include "plots.hpp"

#include "brainalign/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace brainalign::app {

namespace {

using Table = std::vector<std::vector<std::string>>;

Table parse_csv(const std::string& text)
{
    Table rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

double number(const std::string& s)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("report: '" + s + "' is not a number");
    return v;
}

std::string markdown(const Table& t, std::size_t max_rows = 60)
{
    if (t.empty())
        return "(empty)\n\n";
    std::string out = "|";
    for (const auto& h : t.front())
        out += " " + h + " |";
    out += "\n|";
    for (std::size_t i = 0; i < t.front().size(); ++i)
        out += " --- |";
    out += "\n";
    for (std::size_t r = 1; r < t.size() && r <= max_rows; ++r) {
        out += "|";
        for (const auto& c : t[r])
            out += " " + c + " |";
        out += "\n";
    }
    if (t.size() > max_rows + 1)
        out += "\n" + std::to_string(t.size() - 1 - max_rows) + " more rows omitted.\n";
    return out + "\n";
}

// Long-format (key, layer, value) rows regrouped into one series per key.
void long_series(const Table& t, std::size_t key_col, std::size_t layer_col, std::size_t value_col,
                 std::vector<double>& x, std::vector<Series>& series)
{
    std::map<double, std::size_t> layer_pos;
    for (std::size_t r = 1; r < t.size(); ++r)
        layer_pos.emplace(number(t[r][layer_col]), 0);
    x.clear();
    for (auto& [layer, pos] : layer_pos) {
        pos = x.size();
        x.push_back(layer);
    }
    std::vector<std::string> keys;
    std::map<std::string, std::vector<double>> values;
    for (std::size_t r = 1; r < t.size(); ++r) {
        const std::string key = key_col == layer_col ? std::string("value") : t[r][key_col];
        auto [it, inserted] = values.try_emplace(key, x.size(), std::numeric_limits<double>::quiet_NaN());
        if (inserted)
            keys.push_back(key);
        it->second[layer_pos[number(t[r][layer_col])]] = number(t[r][value_col]);
    }
    series.clear();
    for (const auto& k : keys)
        series.push_back({k, values[k]});
}

struct Section {
    const char* file;
    const char* title;
};

const Section kSections[] = {
    {"summary.csv", "Significant ROIs per layer"},
    {"layer_fractions.csv", "Fraction of ROIs differing between layers"},
    {"model_compare.json", "Model comparison (sign-flip test)"},
    {"lmm.json", "Model comparison (mixed model)"},
    {"overlap_counts.csv", "Cross-language overlap of significant ROIs"},
    {"preferred_layer.csv", "Preferred layer"},
    {"networks.csv", "Network profiles"},
    {"convergence.csv", "Cross-language convergence of masked maps"},
    {"id.csv", "Intrinsic dimension"},
    {"surprisal_means.csv", "Layer-wise surprisal"},
    {"surprisal_convergence.csv", "Cross-language convergence of surprisal"},
};

std::string preferred_summary(const Table& t)
{
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (std::size_t r = 1; r < t.size(); ++r) {
        ++counts[t[r][1]].first;
        ++counts[t[r][3]].second;
    }
    Table out{{"layer", "rois_all", "rois_significant"}};
    std::vector<std::pair<int, std::string>> order;
    for (const auto& [layer, c] : counts)
        order.emplace_back(static_cast<int>(number(layer)), layer);
    std::sort(order.begin(), order.end());
    for (const auto& [value, layer] : order)
        out.push_back({value == 0 ? std::string("none") : layer, std::to_string(counts[layer].first),
                       std::to_string(counts[layer].second)});
    return markdown(out);
}

} // namespace

void cmd_report(Context& ctx)
{
    const auto inputs = ctx.params.paths("inputs");
    ctx.params.finish();
    if (inputs.empty())
        throw ConfigError("report: no input directories");

    std::string md = "# brainalign report\n\n";
    std::size_t plot_index = 0;
    for (const auto& dir : inputs) {
        if (!fs::is_directory(dir))
            throw IoError("report: " + dir.string() + " is not a directory");
        const std::string name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
        md += "## " + name + "\n\n";
        bool any = false;
        for (const auto& section : kSections) {
            const fs::path file = dir / section.file;
            if (!fs::exists(file))
                continue;
            any = true;
            ctx.input(file);
            const std::string text = io::read_file(file);
            md += "### " + std::string(section.title) + "\n\n";
            const std::string fname = section.file;
            if (fname.ends_with(".json")) {
                md += "```json\n" + text + "```\n\n";
                continue;
            }
            const Table t = parse_csv(text);
            if (fname == "preferred_layer.csv") {
                md += preferred_summary(t);
                continue;
            }
            md += markdown(t);

            if (!ctx.plots || t.size() < 2)
                continue;
            std::vector<double> x;
            std::vector<Series> series;
            std::string y_label;
            if (fname == "summary.csv") {
                long_series(t, 0, 0, 1, x, series);
                y_label = "significant ROIs";
            } else if (fname == "networks.csv") {
                long_series(t, 0, 1, 2, x, series);
                y_label = "mean brain score";
            } else if (fname == "id.csv") {
                long_series(t, 2, 1, 5, x, series);
                y_label = "2NN ID";
            } else if (fname == "surprisal_means.csv") {
                long_series(t, 0, 1, 2, x, series);
                y_label = "mean surprisal (nats)";
            } else {
                continue;
            }
            const std::string plot = "plots/" + std::to_string(++plot_index) + "_" +
                                     fname.substr(0, fname.size() - 4) + ".svg";
            ctx.write(plot, line_plot(std::string(section.title) + " (" + name + ")", "layer", y_label, x, series));
            md += "![" + std::string(section.title) + "](" + plot + ")\n\n";
        }
        if (!any)
            md += "No recognised artifacts.\n\n";
    }
    ctx.write("report.md", md);
}

} // namespace brainalign::app
