#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evstock/common/errors.hpp"
#include "evstock/common/text.hpp"
#include "evstock/eval/correlate.hpp"
#include "evstock/models/train.hpp"

namespace evstock::eval {

using models::AccuracyCurves;

namespace detail {

inline std::string svg_num(double v) {
    // coordinates rounded to 1/100 px keep plots small and byte-stable
    return format_double(std::round(v * 100.0) / 100.0);
}

inline std::string polyline(const std::vector<double>& values, double x0, double y0, double w,
                            double h, const char* color) {
    // y in [0,1] maps to plot height; x spreads epochs across the width
    std::string pts;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double fx = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
        const double x = x0 + fx * w;
        const double y = y0 + h - values[i] * h;
        if (i) pts += ' ';
        pts += svg_num(x) + "," + svg_num(y);
    }
    return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
}

} // namespace detail

/// Standalone SVG with the train and test accuracy series, axes, and a
/// legend. Identical input produces identical bytes.
inline std::string render_curves_svg(const AccuracyCurves& curves,
                                     std::string_view comment = {}) {
    const double width = 640, height = 400;
    const double x0 = 60, y0 = 20, plot_w = width - x0 - 20, plot_h = height - y0 - 50;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n";
    if (!comment.empty()) svg += "  <!-- " + std::string(comment) + " -->\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";

    // axes
    svg += "  <line x1=\"" + detail::svg_num(x0) + "\" y1=\"" + detail::svg_num(y0) +
           "\" x2=\"" + detail::svg_num(x0) + "\" y2=\"" + detail::svg_num(y0 + plot_h) +
           "\" stroke=\"black\"/>\n";
    svg += "  <line x1=\"" + detail::svg_num(x0) + "\" y1=\"" + detail::svg_num(y0 + plot_h) +
           "\" x2=\"" + detail::svg_num(x0 + plot_w) + "\" y2=\"" +
           detail::svg_num(y0 + plot_h) + "\" stroke=\"black\"/>\n";

    // y ticks every 0.25
    for (int i = 0; i <= 4; ++i) {
        const double v = 0.25 * i;
        const double y = y0 + plot_h - v * plot_h;
        svg += "  <line x1=\"" + detail::svg_num(x0 - 4) + "\" y1=\"" + detail::svg_num(y) +
               "\" x2=\"" + detail::svg_num(x0) + "\" y2=\"" + detail::svg_num(y) +
               "\" stroke=\"black\"/>\n";
        svg += "  <text x=\"" + detail::svg_num(x0 - 8) + "\" y=\"" + detail::svg_num(y + 4) +
               "\" font-size=\"12\" text-anchor=\"end\">" + format_double(v) + "</text>\n";
    }

    // x ticks: first and last epoch
    const std::size_t epochs = curves.train.size();
    for (std::size_t e : std::vector<std::size_t>{1, epochs}) {
        const double fx =
            epochs == 1 ? 0.5 : static_cast<double>(e - 1) / static_cast<double>(epochs - 1);
        const double x = x0 + fx * plot_w;
        svg += "  <line x1=\"" + detail::svg_num(x) + "\" y1=\"" +
               detail::svg_num(y0 + plot_h) + "\" x2=\"" + detail::svg_num(x) + "\" y2=\"" +
               detail::svg_num(y0 + plot_h + 4) + "\" stroke=\"black\"/>\n";
        svg += "  <text x=\"" + detail::svg_num(x) + "\" y=\"" +
               detail::svg_num(y0 + plot_h + 18) + "\" font-size=\"12\" text-anchor=\"middle\">" +
               std::to_string(e) + "</text>\n";
    }

    svg += "  <text x=\"" + detail::svg_num(x0 + plot_w / 2) + "\" y=\"" +
           detail::svg_num(height - 12) + "\" font-size=\"14\" text-anchor=\"middle\">epoch"
           "</text>\n";
    svg += "  <text x=\"16\" y=\"" + detail::svg_num(y0 + plot_h / 2) +
           "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::svg_num(y0 + plot_h / 2) + ")\">accuracy</text>\n";

    svg += detail::polyline(curves.train, x0, y0, plot_w, plot_h, "#1f77b4");
    svg += detail::polyline(curves.test, x0, y0, plot_w, plot_h, "#ff7f0e");

    // legend
    svg += "  <line x1=\"480\" y1=\"30\" x2=\"510\" y2=\"30\" stroke=\"#1f77b4\" "
           "stroke-width=\"1.5\"/>\n";
    svg += "  <text x=\"516\" y=\"34\" font-size=\"12\">train</text>\n";
    svg += "  <line x1=\"480\" y1=\"48\" x2=\"510\" y2=\"48\" stroke=\"#ff7f0e\" "
           "stroke-width=\"1.5\"/>\n";
    svg += "  <text x=\"516\" y=\"52\" font-size=\"12\">test</text>\n";
    svg += "</svg>\n";
    return svg;
}

/// Writes `<base>.csv` (epoch,train_acc,test_acc) and `<base>.svg`. The
/// optional header comment becomes a leading `# ...` CSV line and an XML
/// comment; identical input yields byte-identical files.
inline void emit_curves(const AccuracyCurves& curves, const std::filesystem::path& base_path,
                        std::string_view header_comment = {}) {
    if (curves.train.empty() || curves.train.size() != curves.test.size()) {
        throw DataError("emit_curves: need equal-length non-empty curves");
    }
    std::string csv;
    if (!header_comment.empty()) csv += "# " + std::string(header_comment) + "\n";
    csv += "epoch,train_acc,test_acc\n";
    for (std::size_t i = 0; i < curves.train.size(); ++i) {
        csv += std::to_string(i + 1) + "," + format_double(curves.train[i]) + "," +
               format_double(curves.test[i]) + "\n";
    }
    auto csv_path = base_path;
    csv_path += ".csv";
    write_file(csv_path, csv);

    auto svg_path = base_path;
    svg_path += ".svg";
    write_file(svg_path, render_curves_svg(curves, header_comment));
}

/// Correlation table CSV: score_kind,lag_days,pearson_r,n plus `# warning`
/// lines for omitted rows.
inline void save_correlations(const LagCorrelationTable& table,
                              const std::filesystem::path& path,
                              std::string_view header_comment = {}) {
    std::string csv;
    if (!header_comment.empty()) csv += "# " + std::string(header_comment) + "\n";
    csv += "score_kind,lag_days,pearson_r,n\n";
    for (const auto& row : table.rows) {
        csv += row.score_kind + "," + std::to_string(row.lag_days) + "," +
               format_double(row.r) + "," + std::to_string(row.n) + "\n";
    }
    for (const auto& w : table.warnings) csv += "# warning: " + w + "\n";
    write_file(path, csv);
}

} // namespace evstock::eval
