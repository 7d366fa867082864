#pragma once

// Flat static SVG charts. Output depends only on the data, so plots are as
// reproducible as the CSV artifacts.

#include "brainalign/common.hpp"

#include <string>
#include <vector>

namespace brainalign::app {

struct Series {
    std::string label;
    std::vector<double> y; ///< NaN leaves a gap
};

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& x, const std::vector<Series>& series);

std::string bar_plot(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                     const std::vector<double>& values);

/// Rows x columns grid of shaded cells, one row per label in `rows`.
std::string heat_grid(const std::string& title, const std::vector<std::string>& rows,
                      const std::vector<std::string>& columns, const Matrix& values);

} // namespace brainalign::app
