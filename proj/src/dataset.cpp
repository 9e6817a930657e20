#include "hrv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hrv/common.hpp"
#include "hrv/csv.hpp"
#include "hrv/rng.hpp"

namespace hrv {

namespace {

bool parse_number(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    if (begin == end) return false;
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Dataset Dataset::subset_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.feature_names = feature_names;
    out.features = Matrix(rows.size(), n_features());
    out.labels.reserve(rows.size());
    out.row_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        std::copy(features.row(r).begin(), features.row(r).end(), out.features.row(i).begin());
        out.labels.push_back(labels[r]);
        out.row_ids.push_back(row_ids[r]);
    }
    return out;
}

Dataset Dataset::subset_features(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    cols.reserve(names.size());
    for (const auto& name : names) {
        auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) fail("data", "unknown feature '" + name + "'");
        cols.push_back(static_cast<std::size_t>(it - feature_names.begin()));
    }
    Dataset out;
    out.feature_names = names;
    out.labels = labels;
    out.row_ids = row_ids;
    out.features = Matrix(n_rows(), cols.size());
    for (std::size_t r = 0; r < n_rows(); ++r) {
        for (std::size_t j = 0; j < cols.size(); ++j) out.features(r, j) = features(r, cols[j]);
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, const FeatureCatalog& catalog,
                     const LoadOptions& options) {
    CsvTable table = read_csv(path);
    if (table.rows.empty()) fail("data", "empty dataset '" + path.string() + "'");

    const std::size_t label_col = table.column_index(options.label_column);
    std::vector<std::size_t> feature_cols(catalog.size());
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        feature_cols[j] = table.column_index(catalog.entries[j].name);
    }
    const bool has_ids = table.has_column("row_id");
    const std::size_t id_col = has_ids ? table.column_index("row_id") : 0;

    const std::size_t n = table.rows.size();
    Dataset d;
    d.feature_names = catalog.names();
    d.features = Matrix(n, catalog.size());
    d.labels.resize(n);
    d.row_ids.resize(n);

    // (row, col) cells needing imputation, collected on the first pass
    std::vector<std::pair<std::size_t, std::size_t>> missing;

    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            fail("data", "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(table.header.size()));
        }
        double label_val = 0.0;
        if (!parse_number(row[label_col], label_val) || (label_val != 0.0 && label_val != 1.0)) {
            fail("data", "unknown label value '" + row[label_col] + "' at row " +
                             std::to_string(r + 1));
        }
        d.labels[r] = static_cast<int>(label_val);
        d.row_ids[r] = has_ids ? row[id_col] : "r" + std::to_string(r);
        for (std::size_t j = 0; j < catalog.size(); ++j) {
            double v = 0.0;
            if (parse_number(row[feature_cols[j]], v) && std::isfinite(v)) {
                d.features(r, j) = v;
            } else if (options.impute_median) {
                missing.emplace_back(r, j);
                d.features(r, j) = std::numeric_limits<double>::quiet_NaN();
            } else {
                fail("data", "non-numeric cell in column '" + catalog.entries[j].name +
                                 "' at row " + std::to_string(r + 1));
            }
        }
    }

    if (!missing.empty()) {
        for (std::size_t j = 0; j < catalog.size(); ++j) {
            std::vector<double> present;
            present.reserve(n);
            for (std::size_t r = 0; r < n; ++r) {
                const double v = d.features(r, j);
                if (std::isfinite(v)) present.push_back(v);
            }
            if (present.empty()) fail("data", "column '" + catalog.entries[j].name + "' has no numeric values");
        }
        for (auto [r, j] : missing) {
            std::vector<double> col;
            col.reserve(n);
            for (std::size_t rr = 0; rr < n; ++rr) {
                const double v = d.features(rr, j);
                if (std::isfinite(v)) col.push_back(v);
            }
            d.features(r, j) = median_of(std::move(col));
        }
    }
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const std::string& label_column) {
    std::vector<std::string> header;
    header.push_back("row_id");
    for (const auto& name : d.feature_names) header.push_back(name);
    header.push_back(label_column);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        std::vector<std::string> row;
        row.reserve(header.size());
        row.push_back(d.row_ids[r]);
        for (std::size_t j = 0; j < d.n_features(); ++j) row.push_back(format_double(d.features(r, j)));
        row.push_back(std::to_string(d.labels[r]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        fail("config", "test_fraction must lie in (0,1)");
    }
    std::vector<std::size_t> neg, pos;
    for (std::size_t r = 0; r < d.n_rows(); ++r) (d.labels[r] == 1 ? pos : neg).push_back(r);
    if (neg.size() < 2 || pos.size() < 2) {
        fail("data", "each class needs at least 2 rows to split");
    }

    std::vector<std::size_t> test_rows, train_rows;
    Rng rng(seed);
    for (auto* cls : {&neg, &pos}) {
        auto shuffled = *cls;
        rng.shuffle(shuffled);
        const std::size_t n_test =
            static_cast<std::size_t>(std::floor(static_cast<double>(cls->size()) * test_fraction + 0.5));
        if (n_test == 0 || n_test >= cls->size()) {
            fail("data", "a class is too small to populate both partitions");
        }
        test_rows.insert(test_rows.end(), shuffled.begin(), shuffled.begin() + n_test);
        train_rows.insert(train_rows.end(), shuffled.begin() + n_test, shuffled.end());
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {d.subset_rows(train_rows), d.subset_rows(test_rows)};
}

ClassWeights balanced_class_weights(const std::vector<int>& labels) {
    const std::size_t n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) fail("data", "both classes must be present");
    const double total = static_cast<double>(labels.size());
    return {total / (2.0 * static_cast<double>(n_neg)), total / (2.0 * static_cast<double>(n_pos))};
}

Standardizer fit_standardizer(const Matrix& train_features) {
    const std::size_t n = train_features.rows;
    const std::size_t d = train_features.cols;
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    if (n == 0) return s;
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += train_features(r, j);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dlt = train_features(r, j) - mean;
            sq += dlt * dlt;
        }
        s.mean[j] = mean;
        s.stddev[j] = std::sqrt(sq / static_cast<double>(n));
    }
    return s;
}

Matrix apply_standardizer(const Standardizer& s, const Matrix& features) {
    Matrix out = features;
    for (std::size_t j = 0; j < features.cols; ++j) {
        const double div = s.stddev[j] < 1e-12 ? 1.0 : s.stddev[j];  // constant column -> zeros
        for (std::size_t r = 0; r < features.rows; ++r) {
            out(r, j) = (features(r, j) - s.mean[j]) / div;
        }
    }
    return out;
}

Matrix invert_standardizer(const Standardizer& s, const Matrix& standardized) {
    Matrix out = standardized;
    for (std::size_t j = 0; j < standardized.cols; ++j) {
        const double div = s.stddev[j] < 1e-12 ? 1.0 : s.stddev[j];
        for (std::size_t r = 0; r < standardized.rows; ++r) {
            out(r, j) = standardized(r, j) * div + s.mean[j];
        }
    }
    return out;
}

SynthResult synth_dataset(const SynthConfig& cfg) {
    if (cfg.n_informative + cfg.n_noise < 1) fail("config", "need at least one column");
    Rng rng(cfg.seed);
    const std::size_t d = cfg.n_informative + cfg.n_noise;

    SynthResult out;
    out.data.features = Matrix(cfg.n_rows, d);
    out.data.labels.resize(cfg.n_rows);
    out.data.row_ids.resize(cfg.n_rows);
    for (std::size_t j = 0; j < cfg.n_informative; ++j) {
        std::string name = "inf_" + std::to_string(j);
        out.data.feature_names.push_back(name);
        out.informative.push_back(name);
    }
    for (std::size_t j = 0; j < cfg.n_noise; ++j) {
        out.data.feature_names.push_back("noise_" + std::to_string(j));
    }

    for (std::size_t r = 0; r < cfg.n_rows; ++r) {
        const int label = rng.uniform() < cfg.class_balance ? 1 : 0;
        out.data.labels[r] = label;
        out.data.row_ids[r] = "s" + std::to_string(r);
        for (std::size_t j = 0; j < d; ++j) {
            const double mean = (j < cfg.n_informative && label == 1) ? cfg.shift : 0.0;
            out.data.features(r, j) = rng.normal(mean, 1.0);
        }
    }
    return out;
}

void save_synth(const SynthResult& s, const std::filesystem::path& csv_path) {
    save_dataset(s.data, csv_path);
    std::filesystem::path sidecar = csv_path;
    sidecar += ".informative.txt";
    std::ofstream out(sidecar, std::ios::binary);
    if (!out) fail("io", "cannot write '" + sidecar.string() + "'");
    for (const auto& name : s.informative) out << name << '\n';
}

}  // namespace hrv
