#include "hrv/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrv/common.hpp"
#include "hrv/gbm.hpp"  // logistic

namespace hrv {

namespace {

Matrix predictions_as_columns(const TrainedModel& hpm, const TrainedModel& hrm,
                              const Dataset& rows) {
    const auto p_hpm = hpm.predict_proba(rows.features);
    const auto p_hrm = hrm.predict_proba(rows.features);
    Matrix m(rows.n_rows(), 2);
    for (std::size_t r = 0; r < rows.n_rows(); ++r) {
        m(r, 0) = p_hpm[r];
        m(r, 1) = p_hrm[r];
    }
    return m;
}

// Gaussian elimination with partial pivoting; a is n x n, b length n.
// Returns false when the matrix is numerically singular.
bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>& out) {
    const std::size_t n = a.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        if (std::abs(a(pivot, col)) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= factor * a(col, j);
            b[r] -= factor * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t j = r + 1; j < n; ++j) acc -= a(r, j) * out[j];
        out[r] = acc / a(r, r);
    }
    return true;
}

double mean_nll(const Matrix& x, std::span<const int> y, const std::vector<double>& w,
                double bias) {
    double nll = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        double s = bias;
        for (std::size_t j = 0; j < x.cols; ++j) s += w[j] * x(r, j);
        // -log p(y | s) in a numerically stable form
        const double z = y[r] == 1 ? -s : s;
        nll += z > 35.0 ? z : std::log1p(std::exp(z));
    }
    return nll / static_cast<double>(x.rows);
}

}  // namespace

Matrix meta_probabilities(const TrainedModel& hpm, const TrainedModel& hrm, const Dataset& rows) {
    return predictions_as_columns(hpm, hrm, rows);
}

MetaFeatures build_meta_features(const TrainedModel& hpm, const TrainedModel& hrm,
                                 const Dataset& rows) {
    MetaFeatures meta;
    meta.raw = predictions_as_columns(hpm, hrm, rows);
    meta.scaler = fit_standardizer(meta.raw);
    meta.z = apply_standardizer(meta.scaler, meta.raw);
    meta.row_ids = rows.row_ids;
    return meta;
}

std::vector<double> LogisticModel::predict_proba(const Matrix& features) const {
    if (features.cols != weights.size()) fail("data", "meta feature count mismatch");
    std::vector<double> out(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r) {
        double s = bias;
        for (std::size_t j = 0; j < features.cols; ++j) s += weights[j] * features(r, j);
        out[r] = logistic(s);
    }
    return out;
}

LogisticModel train_logistic_meta(const Matrix& features, std::span<const int> labels,
                                  int max_iter, double tol) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    if (n != labels.size()) fail("data", "labels length mismatch");
    std::int64_t pos = 0;
    for (int y : labels) pos += y == 1;
    if (pos == 0 || pos == static_cast<std::int64_t>(n)) {
        fail("train", "both classes must be present");
    }

    LogisticModel model;
    model.weights.assign(d, 0.0);
    double nll = mean_nll(features, labels, model.weights, model.bias);
    model.nll_trace.push_back(nll);

    for (int iter = 0; iter < max_iter; ++iter) {
        // gradient and Hessian of the mean NLL over (weights, bias)
        std::vector<double> grad(d + 1, 0.0);
        Matrix hess(d + 1, d + 1);
        for (std::size_t r = 0; r < n; ++r) {
            double s = model.bias;
            for (std::size_t j = 0; j < d; ++j) s += model.weights[j] * features(r, j);
            const double p = logistic(s);
            const double resid = p - static_cast<double>(labels[r]);
            const double curv = std::max(p * (1.0 - p), 1e-12);
            for (std::size_t j = 0; j < d; ++j) grad[j] += resid * features(r, j);
            grad[d] += resid;
            for (std::size_t j = 0; j < d; ++j) {
                for (std::size_t k = 0; k <= j; ++k) {
                    hess(j, k) += curv * features(r, j) * features(r, k);
                }
                hess(j, d) += curv * features(r, j);
            }
            hess(d, d) += curv;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j <= d; ++j) {
            grad[j] *= inv_n;
            for (std::size_t k = 0; k <= j; ++k) {
                hess(j, k) *= inv_n;
                hess(k, j) = hess(j, k);
            }
        }

        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        model.final_grad_norm = gnorm;
        if (gnorm < tol) {
            model.converged = true;
            break;
        }

        // Levenberg damping rescues rank-deficient Hessians (identical or
        // constant meta columns); the first level leaves well-posed problems
        // untouched.
        double max_diag = 0.0;
        for (std::size_t j = 0; j <= d; ++j) max_diag = std::max(max_diag, hess(j, j));
        std::vector<double> step;
        bool solved = false;
        for (double damp : {0.0, 1e-10, 1e-7, 1e-4, 1e-2}) {
            Matrix damped = hess;
            for (std::size_t j = 0; j <= d; ++j) damped(j, j) += damp * std::max(max_diag, 1.0);
            if (solve_linear(std::move(damped), grad, step)) {
                solved = true;
                break;
            }
        }
        if (!solved) break;

        // step halving keeps the NLL trace non-increasing
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            std::vector<double> w_try = model.weights;
            double b_try = model.bias;
            for (std::size_t j = 0; j < d; ++j) w_try[j] -= scale * step[j];
            b_try -= scale * step[d];
            const double nll_try = mean_nll(features, labels, w_try, b_try);
            if (nll_try <= nll) {
                model.weights = std::move(w_try);
                model.bias = b_try;
                nll = nll_try;
                model.nll_trace.push_back(nll);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;  // no descent direction left at this scale
    }
    return model;
}

double SvmModel::decision(std::span<const double> x) const {
    double acc = bias;
    for (std::size_t i = 0; i < support_vectors.rows; ++i) {
        double dist2 = 0.0;
        for (std::size_t j = 0; j < support_vectors.cols; ++j) {
            const double diff = support_vectors(i, j) - x[j];
            dist2 += diff * diff;
        }
        acc += alpha_y[i] * std::exp(-gamma * dist2);
    }
    return acc;
}

std::vector<double> SvmModel::decision_values(const Matrix& features) const {
    if (features.cols != support_vectors.cols) fail("data", "meta feature count mismatch");
    std::vector<double> out(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r) out[r] = decision(features.row(r));
    return out;
}

std::vector<double> SvmModel::predict_proba(const Matrix& features) const {
    std::vector<double> out = decision_values(features);
    for (double& v : out) v = logistic(v);
    return out;
}

SvmModel train_svm_meta(const Matrix& features, std::span<const int> labels,
                        const SvmConfig& cfg) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    if (n != labels.size()) fail("data", "labels length mismatch");
    std::int64_t n_pos = 0;
    for (int y : labels) n_pos += y == 1;
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(n)) {
        fail("train", "both classes must be present");
    }

    double gamma = cfg.gamma;
    if (gamma <= 0.0) {
        // "scale": 1 / (n_features * variance of the full feature matrix)
        double mean = 0.0;
        for (double v : features.data) mean += v;
        mean /= static_cast<double>(features.data.size());
        double var = 0.0;
        for (double v : features.data) var += (v - mean) * (v - mean);
        var /= static_cast<double>(features.data.size());
        gamma = var > 1e-12 ? 1.0 / (static_cast<double>(d) * var) : 1.0;
    }

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;

    std::vector<double> box(n, cfg.C);
    if (cfg.balanced_class_weights) {
        const double total = static_cast<double>(n);
        const double w_pos = total / (2.0 * static_cast<double>(n_pos));
        const double w_neg = total / (2.0 * static_cast<double>(n - n_pos));
        for (std::size_t i = 0; i < n; ++i) box[i] = cfg.C * (labels[i] == 1 ? w_pos : w_neg);
    }

    // full kernel matrix; meta problems are small
    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double dist2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = features(i, c) - features(j, c);
                dist2 += diff * diff;
            }
            const double k = std::exp(-gamma * dist2);
            K(i, j) = k;
            K(j, i) = k;
        }
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> err(n);  // f(x_i) - y_i with alpha = 0, b = 0
    for (std::size_t i = 0; i < n; ++i) err[i] = -y[i];
    double b = 0.0;
    const double tol = cfg.tolerance;
    const double eps = 1e-12;

    auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
        if (i1 == i2) return false;
        const double a1 = alpha[i1], a2 = alpha[i2];
        const double y1 = y[i1], y2 = y[i2];
        const double e1 = err[i1], e2 = err[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(box[i2], box[i1] + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - box[i1]);
            hi = std::min(box[i2], a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = K(i1, i1), k12 = K(i1, i2), k22 = K(i2, i2);
        const double eta = 2.0 * k12 - k11 - k22;
        double a2_new;
        if (eta < 0.0) {
            a2_new = a2 - y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // flat or concave direction: pick the better endpoint
            const double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                  s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                  s * hi * h1 * k12;
            if (obj_lo < obj_hi - eps) a2_new = lo;
            else if (obj_hi < obj_lo - eps) a2_new = hi;
            else a2_new = a2;
        }
        if (std::abs(a2_new - a2) < eps * (a2_new + a2 + eps)) return false;
        const double a1_new = a1 + s * (a2 - a2_new);

        const double b_old = b;
        const double b1 = b - e1 - y1 * (a1_new - a1) * k11 - y2 * (a2_new - a2) * k12;
        const double b2 = b - e2 - y1 * (a1_new - a1) * k12 - y2 * (a2_new - a2) * k22;
        if (a1_new > 0.0 && a1_new < box[i1]) b = b1;
        else if (a2_new > 0.0 && a2_new < box[i2]) b = b2;
        else b = 0.5 * (b1 + b2);

        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);
        const double db = b - b_old;
        for (std::size_t i = 0; i < n; ++i) {
            err[i] += d1 * K(i1, i) + d2 * K(i2, i) + db;
        }
        return true;
    };

    auto examine = [&](std::size_t i2) -> bool {
        const double r2 = err[i2] * y[i2];
        const bool violates = (r2 < -tol && alpha[i2] < box[i2]) || (r2 > tol && alpha[i2] > 0.0);
        if (!violates) return false;

        // second-choice heuristic: maximize |e1 - e2| over non-bound points
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] > 0.0 && alpha[i] < box[i]) {
                const double gap = std::abs(err[i] - err[i2]);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        }
        if (best < n && take_step(best, i2)) return true;
        for (std::size_t i = 0; i < n; ++i) {
            if (alpha[i] > 0.0 && alpha[i] < box[i] && take_step(i, i2)) return true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (take_step(i, i2)) return true;
        }
        return false;
    };

    int passes = 0;
    bool examine_all = true;
    int changed = 0;
    while ((changed > 0 || examine_all) && passes < cfg.max_passes) {
        changed = 0;
        if (examine_all) {
            for (std::size_t i = 0; i < n; ++i) changed += examine(i) ? 1 : 0;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                if (alpha[i] > 0.0 && alpha[i] < box[i]) changed += examine(i) ? 1 : 0;
            }
        }
        if (examine_all) examine_all = false;
        else if (changed == 0) examine_all = true;
        ++passes;
    }

    SvmModel model;
    model.config = cfg;
    model.gamma = gamma;
    model.bias = b;
    model.converged = passes < cfg.max_passes;

    int violations = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = err[i] * y[i];
        if ((r < -tol && alpha[i] < box[i]) || (r > tol && alpha[i] > 0.0)) ++violations;
    }
    model.kkt_violations = violations;
    if (!model.converged) {
        fail("train", "SVM did not converge: " + std::to_string(violations) +
                          " KKT violations after " + std::to_string(passes) + " passes");
    }

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) sv.push_back(i);
    }
    model.support_vectors = Matrix(sv.size(), d);
    model.alpha_y.resize(sv.size());
    for (std::size_t k = 0; k < sv.size(); ++k) {
        for (std::size_t c = 0; c < d; ++c) model.support_vectors(k, c) = features(sv[k], c);
        model.alpha_y[k] = alpha[sv[k]] * y[sv[k]];
    }
    return model;
}

std::pair<ManualOutcome, CompoundStatus> manual_ensemble(int hpm_label, int hrm_label) {
    if (hpm_label == hrm_label) {
        return hpm_label == 1
                   ? std::make_pair(ManualOutcome::positive, CompoundStatus::agree_positive)
                   : std::make_pair(ManualOutcome::negative, CompoundStatus::agree_negative);
    }
    return {ManualOutcome::refer, CompoundStatus::disagree};
}

double disagreement_rate(std::span<const CompoundStatus> statuses) {
    if (statuses.empty()) fail("data", "disagreement_rate needs at least one status");
    std::size_t n_disagree = 0;
    for (auto s : statuses) n_disagree += s == CompoundStatus::disagree ? 1 : 0;
    return static_cast<double>(n_disagree) / static_cast<double>(statuses.size());
}

}  // namespace hrv
