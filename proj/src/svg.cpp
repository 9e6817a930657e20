#include "hrv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hrv/common.hpp"

namespace hrv {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr const char* kColorA = "#4878a8";  // non-sepsis / first series
constexpr const char* kColorB = "#e0803c";  // sepsis / second series
constexpr const char* kPalette[] = {"#4878a8", "#e0803c", "#6aa84f", "#a64d79"};

std::ofstream open_svg(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot write '" + path.string() + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out;
}

void emit_title(std::ofstream& out, const std::string& title) {
    out << "<text x=\"" << kWidth / 2
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";
}

std::string num(double v) { return format_fixed(v, 2); }

void emit_text(std::ofstream& out, double x, double y, const std::string& s, int size,
               const std::string& anchor) {
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"" << size << "\">" << s << "</text>\n";
}

}  // namespace

void svg_bar_chart(const std::filesystem::path& path, const std::string& title,
                   const std::vector<BarDatum>& bars, const std::string& x_label) {
    auto out = open_svg(path);
    emit_title(out, title);
    const double left = 220.0, right = kWidth - 40.0, top = 50.0, bottom = kHeight - 50.0;

    double vmax = 0.0, vmin = 0.0;
    for (const auto& b : bars) {
        vmax = std::max(vmax, b.value);
        vmin = std::min(vmin, b.value);
    }
    if (vmax == vmin) vmax = vmin + 1.0;
    const double zero_x = left + (0.0 - vmin) / (vmax - vmin) * (right - left);

    const double slot = bars.empty() ? 0.0 : (bottom - top) / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = top + slot * static_cast<double>(i) + slot * 0.15;
        const double h = slot * 0.7;
        const double vx = left + (bars[i].value - vmin) / (vmax - vmin) * (right - left);
        const double bx = std::min(zero_x, vx);
        const double bw = std::abs(vx - zero_x);
        out << "<rect x=\"" << num(bx) << "\" y=\"" << num(y) << "\" width=\"" << num(bw)
            << "\" height=\"" << num(h) << "\" fill=\""
            << (bars[i].value >= 0.0 ? kColorB : kColorA) << "\"/>\n";
        emit_text(out, left - 6.0, y + h * 0.75, bars[i].label, 11, "end");
        emit_text(out, vx + (bars[i].value >= 0.0 ? 4.0 : -4.0), y + h * 0.75,
                  format_fixed(bars[i].value, 3), 10,
                  bars[i].value >= 0.0 ? "start" : "end");
    }
    out << "<line x1=\"" << num(zero_x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(zero_x)
        << "\" y2=\"" << num(bottom) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    emit_text(out, (left + right) / 2.0, kHeight - 14.0, x_label, 12, "middle");
    out << "</svg>\n";
}

void svg_scatter(const std::filesystem::path& path, const std::string& title,
                 const std::vector<ScatterPoint>& points, const std::string& x_label,
                 const std::string& y_label) {
    auto out = open_svg(path);
    emit_title(out, title);
    const double left = 70.0, right = kWidth - 40.0, top = 50.0, bottom = kHeight - 60.0;

    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    for (const auto& p : points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (right - left); };
    auto sy = [&](double v) { return bottom - (v - ymin) / (ymax - ymin) * (bottom - top); };

    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
        << num(right - left) << "\" height=\"" << num(bottom - top)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (const auto& p : points) {
        out << "<circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.y))
            << "\" r=\"3\" fill=\"" << (p.group == 1 ? kColorB : kColorA)
            << "\" fill-opacity=\"0.6\"/>\n";
    }
    emit_text(out, (left + right) / 2.0, kHeight - 14.0, x_label, 12, "middle");
    out << "<text x=\"20\" y=\"" << num((top + bottom) / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 20 "
        << num((top + bottom) / 2.0) << ")\">" << y_label << "</text>\n";
    out << "</svg>\n";
}

void svg_line_chart(const std::filesystem::path& path, const std::string& title,
                    const std::vector<Series>& series, const std::string& x_label,
                    const std::string& y_label) {
    auto out = open_svg(path);
    emit_title(out, title);
    const double left = 70.0, right = kWidth - 40.0, top = 50.0, bottom = kHeight - 60.0;

    std::size_t n = 0;
    double ymin = 0.0, ymax = 0.0;
    bool first = true;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values) {
            if (first) {
                ymin = ymax = v;
                first = false;
            }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (n < 2) n = 2;
    if (ymax == ymin) ymax = ymin + 1.0;

    auto sx = [&](std::size_t i) {
        return left + static_cast<double>(i) / static_cast<double>(n - 1) * (right - left);
    };
    auto sy = [&](double v) { return bottom - (v - ymin) / (ymax - ymin) * (bottom - top); };

    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\""
        << num(right - left) << "\" height=\"" << num(bottom - top)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].values.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 4]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].values.size(); ++i) {
            if (i) out << ' ';
            out << num(sx(i)) << ',' << num(sy(series[s].values[i]));
        }
        out << "\"/>\n";
        emit_text(out, right - 8.0, top + 16.0 + 14.0 * static_cast<double>(s), series[s].name,
                  11, "end");
        out << "<rect x=\"" << num(right - 120.0) << "\" y=\""
            << num(top + 8.0 + 14.0 * static_cast<double>(s)) << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[s % 4] << "\"/>\n";
    }
    emit_text(out, (left + right) / 2.0, kHeight - 14.0, x_label, 12, "middle");
    out << "<text x=\"20\" y=\"" << num((top + bottom) / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 20 "
        << num((top + bottom) / 2.0) << ")\">" << y_label << "</text>\n";
    out << "</svg>\n";
}

void svg_histogram_pair(const std::filesystem::path& path, const std::string& title,
                        const HistogramPair& hist, const std::string& label_a,
                        const std::string& label_b) {
    auto out = open_svg(path);
    emit_title(out, title);
    const double left = 70.0, right = kWidth - 40.0, top = 50.0, bottom = kHeight - 60.0;

    const std::size_t n = hist.freq_a.size();
    double fmax = 0.0;
    for (double v : hist.freq_a) fmax = std::max(fmax, v);
    for (double v : hist.freq_b) fmax = std::max(fmax, v);
    if (fmax <= 0.0) fmax = 1.0;

    const double slot = (right - left) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xa = left + slot * static_cast<double>(i);
        const double ha = hist.freq_a[i] / fmax * (bottom - top);
        const double hb = hist.freq_b[i] / fmax * (bottom - top);
        out << "<rect x=\"" << num(xa + slot * 0.08) << "\" y=\"" << num(bottom - ha)
            << "\" width=\"" << num(slot * 0.4) << "\" height=\"" << num(ha) << "\" fill=\""
            << kColorA << "\" fill-opacity=\"0.8\"/>\n";
        out << "<rect x=\"" << num(xa + slot * 0.52) << "\" y=\"" << num(bottom - hb)
            << "\" width=\"" << num(slot * 0.4) << "\" height=\"" << num(hb) << "\" fill=\""
            << kColorB << "\" fill-opacity=\"0.8\"/>\n";
    }
    // a few edge labels along the axis
    const std::size_t step = std::max<std::size_t>(1, n / 6);
    for (std::size_t i = 0; i <= n; i += step) {
        const double x = left + slot * static_cast<double>(i);
        emit_text(out, x, bottom + 16.0, format_fixed(hist.bin_edges[i], 2), 10, "middle");
    }
    out << "<rect x=\"" << num(right - 130.0) << "\" y=\"" << num(top + 8.0)
        << "\" width=\"10\" height=\"10\" fill=\"" << kColorA << "\"/>\n";
    emit_text(out, right - 115.0, top + 17.0, label_a, 11, "start");
    out << "<rect x=\"" << num(right - 130.0) << "\" y=\"" << num(top + 24.0)
        << "\" width=\"10\" height=\"10\" fill=\"" << kColorB << "\"/>\n";
    emit_text(out, right - 115.0, top + 33.0, label_b, 11, "start");
    out << "</svg>\n";
}

}  // namespace hrv
