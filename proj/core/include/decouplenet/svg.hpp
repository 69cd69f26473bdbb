#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decouplenet/sample.hpp"

namespace dcn::svg {

// Deterministic scalar-to-color rule evaluated on INPUT-space rows; the same
// row keeps its color when its image is plotted, which is what makes the
// scatter diagnostics readable (dark = joint lower corner, bright = joint
// upper corner).
struct ColorRule {
    enum class Kind { mean_of_coordinates, corner_boxes };
    Kind kind = Kind::mean_of_coordinates;
    double threshold = 1.0 / 7.0; // corner_boxes: lower/upper box edge
};

ColorRule parse_color_rule(const std::string& text); // "mean", "corner", "corner:0.2"

std::string color_for_row(const ColorRule& rule, const Eigen::VectorXd& row);

std::vector<std::string> colors_for_sample(const ColorRule& rule, const Sample& input_rows);

// Unit-square scatter plot of an n x 2 sample, one marker per row. colors is
// either empty (single default color) or one "#RRGGBB" per row.
std::string scatter_svg(const Sample& points, const std::vector<std::string>& colors,
                        const std::string& title = "");

// One box per label, in the given order: median line, quartile box, whiskers
// at the most extreme points within 1.5 IQR of the box, outliers as markers.
std::string boxplot_svg(const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>& scores,
                        const std::string& title = "");

} // namespace dcn::svg
