#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hrv {

/// Deterministic, dependency-free SVG writers: fixed canvas, no timestamps,
/// fixed-precision coordinates, so outputs diff cleanly in tests.

struct BarDatum {
    std::string label;
    double value = 0.0;
};

/// Horizontal bar chart (top entry first).
void svg_bar_chart(const std::filesystem::path& path, const std::string& title,
                   const std::vector<BarDatum>& bars, const std::string& x_label);

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    int group = 0;  // 0/1 pick the palette colour
};

void svg_scatter(const std::filesystem::path& path, const std::string& title,
                 const std::vector<ScatterPoint>& points, const std::string& x_label,
                 const std::string& y_label);

struct Series {
    std::string name;
    std::vector<double> values;  // x = 1..n
};

void svg_line_chart(const std::filesystem::path& path, const std::string& title,
                    const std::vector<Series>& series, const std::string& x_label,
                    const std::string& y_label);

struct HistogramPair {
    std::vector<double> bin_edges;  // n_bins + 1
    std::vector<double> freq_a;     // relative frequencies per class
    std::vector<double> freq_b;
};

void svg_histogram_pair(const std::filesystem::path& path, const std::string& title,
                        const HistogramPair& hist, const std::string& label_a,
                        const std::string& label_b);

}  // namespace hrv
