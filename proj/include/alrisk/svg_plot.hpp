#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <alrisk/config.hpp>

namespace alrisk {

//! One plotted curve: mean values with a +/- band half-width per point.
struct PlotSeries
{
    std::string id;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band;
};

namespace detail {

//! Fixed legend colors for the four stock strategies; distinct fallback
//! colors for any other series id (e.g. duplicated strategy entries).
inline std::vector<std::string> series_colors(const std::vector<PlotSeries>& series)
{
    static const char* extras[] = { "#9467bd", "#8c564b", "#e377c2", "#7f7f7f" };
    std::vector<std::string> colors;
    int rank = 0;
    for (const auto& s : series) {
        if (s.id == "passive")
            colors.push_back("#1f77b4");
        else if (s.id == "uncertainty")
            colors.push_back("#ff7f0e");
        else if (s.id == "local_risk_batch")
            colors.push_back("#2ca02c");
        else if (s.id == "survey")
            colors.push_back("#d62728");
        else
            colors.push_back(extras[rank++ % 4]);
    }
    return colors;
}

//! Reads a cmd_run output CSV with the given header into one series per
//! strategy (first-appearance order). `value_col`/`band_col` are column
//! positions of the mean and band columns.
inline std::vector<PlotSeries> read_curve_csv(const std::string& path,
                                              const std::string& expected_header,
                                              int value_col, int band_col)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("plot", "cannot open CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("plot", "CSV '" + path + "' is empty");
    if (detail::trim(line) != expected_header)
        throw ConfigError("plot", "CSV '" + path + "' has header '" + detail::trim(line)
                                      + "', expected '" + expected_header + "'");
    std::vector<PlotSeries> series;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split_csv_line(line);
        if (static_cast<int>(cells.size()) <= std::max(value_col, band_col))
            throw ConfigError("plot", "CSV '" + path + "' line " + std::to_string(line_no)
                                          + " has too few cells");
        try {
            const double x = std::stod(cells[1]);
            const double y = std::stod(cells[value_col]);
            const double b = std::stod(cells[band_col]);
            auto it = std::find_if(series.begin(), series.end(),
                                   [&](const PlotSeries& s) { return s.id == cells[0]; });
            if (it == series.end()) {
                series.push_back({ cells[0], {}, {}, {} });
                it = series.end() - 1;
            }
            it->x.push_back(x);
            it->y.push_back(y);
            it->band.push_back(b);
        } catch (const std::exception&) {
            throw ConfigError("plot", "CSV '" + path + "' line " + std::to_string(line_no)
                                          + " has a non-numeric cell");
        }
    }
    if (series.empty())
        throw ConfigError("plot", "CSV '" + path + "' has no data rows");
    return series;
}

struct PanelFrame
{
    double x0, y0, x1, y1;  // plot area in canvas coordinates (y grows down)
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); }
    double py(double y) const { return y1 - (y - ymin) / (ymax - ymin) * (y1 - y0); }
};

inline std::string fmt_coord(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

inline void render_panel(std::ostream& out, PanelFrame f,
                         const std::vector<PlotSeries>& series, const std::string& title,
                         const std::string& xlabel, const std::string& ylabel,
                         bool zero_line)
{
    f.xmin = f.ymin = std::numeric_limits<double>::infinity();
    f.xmax = f.ymax = -std::numeric_limits<double>::infinity();
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            f.xmin = std::min(f.xmin, s.x[i]);
            f.xmax = std::max(f.xmax, s.x[i]);
            f.ymin = std::min(f.ymin, s.y[i] - s.band[i]);
            f.ymax = std::max(f.ymax, s.y[i] + s.band[i]);
        }
    if (zero_line) {
        f.ymin = std::min(f.ymin, 0.0);
        f.ymax = std::max(f.ymax, 0.0);
    }
    if (f.xmax - f.xmin < 1e-12) {
        f.xmin -= 1.0;
        f.xmax += 1.0;
    }
    const double ypad = std::max((f.ymax - f.ymin) * 0.08, 1e-4);
    f.ymin -= ypad;
    f.ymax += ypad;

    out << "<rect x='" << fmt_coord(f.x0) << "' y='" << fmt_coord(f.y0) << "' width='"
        << fmt_coord(f.x1 - f.x0) << "' height='" << fmt_coord(f.y1 - f.y0)
        << "' fill='white' stroke='#333'/>\n";
    out << "<text x='" << fmt_coord((f.x0 + f.x1) / 2) << "' y='" << fmt_coord(f.y0 - 12)
        << "' text-anchor='middle' font-size='15'>" << title << "</text>\n";
    out << "<text x='" << fmt_coord((f.x0 + f.x1) / 2) << "' y='" << fmt_coord(f.y1 + 34)
        << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
    out << "<text x='" << fmt_coord(f.x0 - 46) << "' y='"
        << fmt_coord((f.y0 + f.y1) / 2) << "' text-anchor='middle' font-size='12' "
        << "transform='rotate(-90 " << fmt_coord(f.x0 - 46) << " "
        << fmt_coord((f.y0 + f.y1) / 2) << ")'>" << ylabel << "</text>\n";

    for (int t = 0; t <= 4; ++t) {
        const double xv = f.xmin + (f.xmax - f.xmin) * t / 4;
        const double yv = f.ymin + (f.ymax - f.ymin) * t / 4;
        out << "<line x1='" << fmt_coord(f.px(xv)) << "' y1='" << fmt_coord(f.y1)
            << "' x2='" << fmt_coord(f.px(xv)) << "' y2='" << fmt_coord(f.y1 + 4)
            << "' stroke='#333'/>\n";
        out << "<text x='" << fmt_coord(f.px(xv)) << "' y='" << fmt_coord(f.y1 + 16)
            << "' text-anchor='middle' font-size='10'>" << fmt_tick(xv) << "</text>\n";
        out << "<line x1='" << fmt_coord(f.x0 - 4) << "' y1='" << fmt_coord(f.py(yv))
            << "' x2='" << fmt_coord(f.x0) << "' y2='" << fmt_coord(f.py(yv))
            << "' stroke='#333'/>\n";
        out << "<text x='" << fmt_coord(f.x0 - 6) << "' y='" << fmt_coord(f.py(yv) + 3)
            << "' text-anchor='end' font-size='10'>" << fmt_tick(yv) << "</text>\n";
    }
    if (zero_line && f.ymin < 0.0 && f.ymax > 0.0)
        out << "<line x1='" << fmt_coord(f.x0) << "' y1='" << fmt_coord(f.py(0.0))
            << "' x2='" << fmt_coord(f.x1) << "' y2='" << fmt_coord(f.py(0.0))
            << "' stroke='#999' stroke-dasharray='4 3'/>\n";

    const std::vector<std::string> colors = series_colors(series);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const std::string& color = colors[si];
        out << "<polygon fill='" << color << "' fill-opacity='0.22' stroke='none' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << fmt_coord(f.px(s.x[i])) << ',' << fmt_coord(f.py(s.y[i] + s.band[i]))
                << ' ';
        for (std::size_t i = s.x.size(); i-- > 0;)
            out << fmt_coord(f.px(s.x[i])) << ',' << fmt_coord(f.py(s.y[i] - s.band[i]))
                << ' ';
        out << "'/>\n";
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.8' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << fmt_coord(f.px(s.x[i])) << ',' << fmt_coord(f.py(s.y[i])) << ' ';
        out << "'/>\n";
    }

    double ly = f.y0 + 14;
    for (std::size_t si = 0; si < series.size(); ++si) {
        out << "<line x1='" << fmt_coord(f.x1 - 150) << "' y1='" << fmt_coord(ly)
            << "' x2='" << fmt_coord(f.x1 - 128) << "' y2='" << fmt_coord(ly)
            << "' stroke='" << colors[si] << "' stroke-width='2.5'/>\n";
        out << "<text x='" << fmt_coord(f.x1 - 122) << "' y='" << fmt_coord(ly + 4)
            << "' font-size='11'>" << series[si].id << "</text>\n";
        ly += 15;
    }
}

} // namespace detail

//! Writes a static curve figure: left panel mean risk per strategy,
//! right panel difference vs passive with the band at +/- 1 SEM. The
//! right panel is omitted when `diffs` has no non-baseline series.
inline void write_learning_curve_svg(const std::vector<PlotSeries>& curves,
                                     const std::vector<PlotSeries>& diffs,
                                     const std::string& out_path)
{
    if (curves.empty())
        throw ConfigError("plot", "no curves to plot");
    std::vector<PlotSeries> diff_drawn;
    for (const auto& s : diffs)
        if (s.id != "passive")
            diff_drawn.push_back(s);
    const bool two_panels = !diff_drawn.empty();

    const double width = two_panels ? 980.0 : 520.0;
    std::ofstream out(out_path);
    if (!out)
        throw std::runtime_error("cannot open '" + out_path + "' for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='430' viewBox='0 0 " << width << " 430'>\n";
    out << "<rect width='" << width << "' height='430' fill='white'/>\n";

    detail::PanelFrame left { 70, 40, 480, 370, 0, 0, 0, 0 };
    detail::render_panel(out, left, curves, "mean test risk", "labels used", "risk", false);
    if (two_panels) {
        detail::PanelFrame right { 560, 40, 950, 370, 0, 0, 0, 0 };
        detail::render_panel(out, right, diff_drawn, "difference vs passive", "labels used",
                             "risk difference", true);
    }
    out << "</svg>\n";
    if (!out)
        throw std::runtime_error("write to '" + out_path + "' failed");
}

//! Reads cmd_run outputs and renders the figure. `diff_csv` may be empty
//! (single-panel figure).
inline void plot_from_csvs(const std::string& aggregate_csv, const std::string& diff_csv,
                           const std::string& out_path)
{
    const std::vector<PlotSeries> curves = detail::read_curve_csv(
        aggregate_csv, "strategy,labels_used,mean_risk,sem,n_reps", 2, 3);
    std::vector<PlotSeries> diffs;
    if (!diff_csv.empty())
        diffs = detail::read_curve_csv(
            diff_csv, "strategy,labels_used,mean_diff_vs_passive,sem_diff", 2, 3);
    write_learning_curve_svg(curves, diffs, out_path);
}

} // namespace alrisk
