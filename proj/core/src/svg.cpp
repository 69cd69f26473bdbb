#include "decouplenet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "decouplenet/errors.hpp"

namespace dcn::svg {

namespace {

struct Color {
    int r, g, b;
};

// Dark-to-bright palette; interpolated for the mean rule, end stops reused as
// the corner-box colors.
constexpr Color STOPS[5] = {
    {0x44, 0x01, 0x54}, {0x3B, 0x52, 0x8B}, {0x21, 0x91, 0x8C},
    {0x5E, 0xC9, 0x62}, {0xFD, 0xE7, 0x25},
};
constexpr Color NEUTRAL = {0xB0, 0xB0, 0xB0};

std::string hex(const Color& c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string gnum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

} // namespace

ColorRule parse_color_rule(const std::string& text) {
    if (text == "mean")
        return ColorRule{};
    if (text == "corner")
        return ColorRule{ColorRule::Kind::corner_boxes, 1.0 / 7.0};
    if (text.rfind("corner:", 0) == 0) {
        char* end = nullptr;
        const double t = std::strtod(text.c_str() + 7, &end);
        if (end != text.c_str() + text.size() || !(t > 0.0 && t < 0.5))
            throw DomainError("color rule: corner threshold must lie in (0, 0.5)");
        return ColorRule{ColorRule::Kind::corner_boxes, t};
    }
    throw DomainError("color rule: expected 'mean', 'corner' or 'corner:<threshold>', got '" +
                      text + "'");
}

std::string color_for_row(const ColorRule& rule, const Eigen::VectorXd& row) {
    if (row.size() < 1)
        throw DomainError("color rule: empty row");
    if (rule.kind == ColorRule::Kind::corner_boxes) {
        if ((row.array() <= rule.threshold).all())
            return hex(STOPS[0]);
        if ((row.array() >= 1.0 - rule.threshold).all())
            return hex(STOPS[4]);
        return hex(NEUTRAL);
    }
    // Mean rule: saturate the outer 5% so rows near the corners reach the
    // exact end stops, interpolate linearly in between.
    const double t = std::min(1.0, std::max(0.0, (row.mean() - 0.05) / 0.9));
    const double x = t * 4.0;
    const int i = std::min(3, static_cast<int>(x));
    const double f = x - i;
    const Color c{
        static_cast<int>(std::lround(STOPS[i].r + f * (STOPS[i + 1].r - STOPS[i].r))),
        static_cast<int>(std::lround(STOPS[i].g + f * (STOPS[i + 1].g - STOPS[i].g))),
        static_cast<int>(std::lround(STOPS[i].b + f * (STOPS[i + 1].b - STOPS[i].b))),
    };
    return hex(c);
}

std::vector<std::string> colors_for_sample(const ColorRule& rule, const Sample& input_rows) {
    std::vector<std::string> colors;
    colors.reserve(static_cast<std::size_t>(input_rows.n()));
    for (Eigen::Index i = 0; i < input_rows.n(); ++i)
        colors.push_back(color_for_row(rule, input_rows.values.row(i).transpose()));
    return colors;
}

std::string scatter_svg(const Sample& points, const std::vector<std::string>& colors,
                        const std::string& title) {
    if (points.d() != 2)
        throw DomainError("scatter_svg: needs a two-column sample");
    if (!colors.empty() && static_cast<Eigen::Index>(colors.size()) != points.n())
        throw DomainError("scatter_svg: need one color per row");

    constexpr double M = 45.0, P = 400.0, W = P + 2 * M;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(W) + " " + num(W) +
         "\" width=\"" + num(W) + "\" height=\"" + num(W) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" + num(W) +
         "\" fill=\"#FFFFFF\"/>\n";
    if (!title.empty())
        s += "<text x=\"" + num(W / 2) +
             "\" y=\"28.00\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"14\">" +
             escape_xml(title) + "</text>\n";
    s += "<rect class=\"frame\" x=\"" + num(M) + "\" y=\"" + num(M) + "\" width=\"" + num(P) +
         "\" height=\"" + num(P) + "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (double tick : {0.0, 0.5, 1.0}) {
        const double x = M + tick * P, y = M + (1.0 - tick) * P;
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(M + P) + "\" x2=\"" + num(x) + "\" y2=\"" +
             num(M + P + 6) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(M + P + 20) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             gnum(tick) + "</text>\n";
        s += "<line x1=\"" + num(M - 6) + "\" y1=\"" + num(y) + "\" x2=\"" + num(M) + "\" y2=\"" +
             num(y) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(M - 10) + "\" y=\"" + num(y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + gnum(tick) +
             "</text>\n";
    }
    for (Eigen::Index i = 0; i < points.n(); ++i) {
        const double x = M + points.values(i, 0) * P;
        const double y = M + (1.0 - points.values(i, 1)) * P;
        const std::string& fill = colors.empty() ? "#3B528B" : colors[static_cast<std::size_t>(i)];
        s += "<circle class=\"pt\" cx=\"" + num(x) + "\" cy=\"" + num(y) +
             "\" r=\"1.80\" fill=\"" + fill + "\" fill-opacity=\"0.75\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

namespace {

double quantile_sorted(const std::vector<double>& s, double p) {
    const double h = (static_cast<double>(s.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

} // namespace

std::string boxplot_svg(const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>& scores,
                        const std::string& title) {
    if (labels.empty() || labels.size() != scores.size())
        throw DataError("boxplot_svg: need one non-empty score list per label");
    for (const auto& v : scores)
        if (v.empty())
            throw DataError("boxplot_svg: a model has no scores");

    double lo = scores[0][0], hi = scores[0][0];
    for (const auto& v : scores)
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (hi <= lo) { // degenerate range: pad so the scale stays well defined
        const double pad = std::max(1e-9, std::abs(hi) * 0.1);
        lo -= pad;
        hi += pad;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }

    constexpr double TOP = 45.0, BOTTOM = 95.0, LEFT = 70.0, RIGHT = 25.0;
    constexpr double SLOT = 95.0, BOXW = 44.0, PH = 360.0;
    const double width = LEFT + SLOT * static_cast<double>(labels.size()) + RIGHT;
    const double height = TOP + PH + BOTTOM;
    const auto ypx = [&](double v) { return TOP + (1.0 - (v - lo) / (hi - lo)) * PH; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(width) + " " +
         num(height) + "\" width=\"" + num(width) + "\" height=\"" + num(height) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"#FFFFFF\"/>\n";
    if (!title.empty())
        s += "<text x=\"" + num(width / 2) +
             "\" y=\"26.00\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"14\">" +
             escape_xml(title) + "</text>\n";
    s += "<line x1=\"" + num(LEFT - 8) + "\" y1=\"" + num(TOP) + "\" x2=\"" + num(LEFT - 8) +
         "\" y2=\"" + num(TOP + PH) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        s += "<line x1=\"" + num(LEFT - 12) + "\" y1=\"" + num(ypx(v)) + "\" x2=\"" +
             num(LEFT - 8) + "\" y2=\"" + num(ypx(v)) +
             "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(LEFT - 16) + "\" y=\"" + num(ypx(v) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + gnum(v) +
             "</text>\n";
    }

    for (std::size_t k = 0; k < labels.size(); ++k) {
        std::vector<double> v = scores[k];
        std::sort(v.begin(), v.end());
        const double q1 = quantile_sorted(v, 0.25);
        const double q2 = quantile_sorted(v, 0.50);
        const double q3 = quantile_sorted(v, 0.75);
        const double iqr = q3 - q1;
        double wlo = q2, whi = q2;
        bool any = false;
        for (double x : v)
            if (x >= q1 - 1.5 * iqr && x <= q3 + 1.5 * iqr) {
                if (!any) {
                    wlo = whi = x;
                    any = true;
                } else {
                    wlo = std::min(wlo, x);
                    whi = std::max(whi, x);
                }
            }

        const double cx = LEFT + SLOT * (static_cast<double>(k) + 0.5);
        s += "<line class=\"whisker\" x1=\"" + num(cx) + "\" y1=\"" + num(ypx(wlo)) +
             "\" x2=\"" + num(cx) + "\" y2=\"" + num(ypx(q1)) +
             "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<line class=\"whisker\" x1=\"" + num(cx) + "\" y1=\"" + num(ypx(q3)) +
             "\" x2=\"" + num(cx) + "\" y2=\"" + num(ypx(whi)) +
             "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        for (double cap : {wlo, whi})
            s += "<line x1=\"" + num(cx - BOXW / 4) + "\" y1=\"" + num(ypx(cap)) + "\" x2=\"" +
                 num(cx + BOXW / 4) + "\" y2=\"" + num(ypx(cap)) +
                 "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<rect class=\"box\" x=\"" + num(cx - BOXW / 2) + "\" y=\"" + num(ypx(q3)) +
             "\" width=\"" + num(BOXW) + "\" height=\"" + num(ypx(q1) - ypx(q3)) +
             "\" fill=\"#5EC962\" fill-opacity=\"0.35\" stroke=\"#333333\" "
             "stroke-width=\"1\"/>\n";
        s += "<line class=\"median\" x1=\"" + num(cx - BOXW / 2) + "\" y1=\"" + num(ypx(q2)) +
             "\" x2=\"" + num(cx + BOXW / 2) + "\" y2=\"" + num(ypx(q2)) +
             "\" stroke=\"#440154\" stroke-width=\"2\"/>\n";
        for (double x : v)
            if (x < q1 - 1.5 * iqr || x > q3 + 1.5 * iqr)
                s += "<circle class=\"out\" cx=\"" + num(cx) + "\" cy=\"" + num(ypx(x)) +
                     "\" r=\"2.20\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(cx) + "\" y=\"" + num(TOP + PH + 18) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" "
             "transform=\"rotate(-25 " +
             num(cx) + " " + num(TOP + PH + 18) + ")\">" + escape_xml(labels[k]) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace dcn::svg
