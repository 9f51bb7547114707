#pragma once

/**
 * @file massmodel.hpp
 * @brief Linear mass model M = W0 + sum(Wi * Fi): least-squares fitting,
 *        regression metrics, and exhaustive search over all 63 non-empty
 *        feature subsets.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace fruitgrade::massmodel {

constexpr int kNumFeatures = 6; // L, W, T, PA1, PA2, PA3

struct LinearModel {
    double intercept = 0;
    std::array<double, kNumFeatures> weights{};
    std::array<bool, kNumFeatures> active{};

    int active_count() const {
        int n = 0;
        for (bool a : active)
            n += a;
        return n;
    }
};

struct RegressionMetrics {
    double r_squared = 0;
    double mean_error = 0; // predicted - actual
    double std_error = 0;  // n-1 denominator
    double rmse = 0;
};

inline double predict_mass(const LinearModel& m, const Eigen::VectorXd& features) {
    double y = m.intercept;
    for (int j = 0; j < kNumFeatures; ++j)
        if (m.active[j])
            y += m.weights[j] * features[j];
    return y;
}

inline Eigen::VectorXd predict_mass(const LinearModel& m, const Eigen::MatrixXd& features) {
    Eigen::VectorXd out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        out[i] = predict_mass(m, Eigen::VectorXd(features.row(i)));
    return out;
}

/// Least squares over intercept + active columns via column-pivoted QR.
/// Throws on a rank-deficient design matrix.
inline LinearModel fit_least_squares(const Eigen::MatrixXd& features, const Eigen::VectorXd& mass,
                                     const std::array<bool, kNumFeatures>& active) {
    int n_active = 0;
    for (bool a : active)
        n_active += a;
    if (n_active == 0)
        throw std::invalid_argument("fit_least_squares: empty feature subset");
    if (features.rows() < n_active + 1)
        throw std::invalid_argument("fit_least_squares: not enough rows");

    Eigen::MatrixXd design(features.rows(), n_active + 1);
    design.col(0).setOnes();
    int col = 1;
    for (int j = 0; j < kNumFeatures; ++j)
        if (active[j])
            design.col(col++) = features.col(j);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols())
        throw std::runtime_error("fit_least_squares: singular design matrix");
    Eigen::VectorXd beta = qr.solve(mass);

    LinearModel m;
    m.active = active;
    m.intercept = beta[0];
    col = 1;
    for (int j = 0; j < kNumFeatures; ++j)
        m.weights[j] = active[j] ? beta[col++] : 0.0;
    return m;
}

inline RegressionMetrics evaluate(const LinearModel& m, const Eigen::MatrixXd& features,
                                  const Eigen::VectorXd& mass) {
    const auto n = features.rows();
    if (n < 2)
        throw std::invalid_argument("evaluate: need at least 2 samples");
    Eigen::VectorXd pred = predict_mass(m, features);
    Eigen::VectorXd err = pred - mass;

    RegressionMetrics r;
    r.mean_error = err.mean();
    r.std_error = std::sqrt((err.array() - r.mean_error).square().sum() /
                            static_cast<double>(n - 1));
    r.rmse = std::sqrt(err.array().square().mean());

    double mp = pred.mean(), ma = mass.mean();
    double sp = (pred.array() - mp).square().sum();
    double sa = (mass.array() - ma).square().sum();
    if (sa <= 0)
        throw std::runtime_error("evaluate: zero-variance actual masses, correlation undefined");
    if (sp <= 0) {
        r.r_squared = 0.0; // constant predictions carry no correlation
    } else {
        double cov = ((pred.array() - mp) * (mass.array() - ma)).sum();
        r.r_squared = (cov * cov) / (sp * sa);
    }
    return r;
}

struct SubsetResult {
    std::uint32_t mask = 0; // bit j = feature j active
    LinearModel model;
    RegressionMetrics train;
    RegressionMetrics verify;
    bool failed = false;
    std::string error;
};

struct SearchResult {
    LinearModel best;
    RegressionMetrics best_train;
    RegressionMetrics best_verify;
    std::uint32_t best_mask = 0;
    std::vector<SubsetResult> table; // all 63 subsets
};

/// Fits all 63 non-empty subsets on the train partition and selects the one
/// minimizing verify RMSE; ties break to smaller verify std_error, then to
/// fewer active features, then to the lower mask.
inline SearchResult subset_search(const Eigen::MatrixXd& train_x, const Eigen::VectorXd& train_y,
                                  const Eigen::MatrixXd& verify_x,
                                  const Eigen::VectorXd& verify_y) {
    SearchResult res;
    bool have_best = false;
    for (std::uint32_t mask = 1; mask < (1u << kNumFeatures); ++mask) {
        SubsetResult sr;
        sr.mask = mask;
        std::array<bool, kNumFeatures> active{};
        for (int j = 0; j < kNumFeatures; ++j)
            active[j] = (mask >> j) & 1u;
        try {
            sr.model = fit_least_squares(train_x, train_y, active);
            sr.train = evaluate(sr.model, train_x, train_y);
            sr.verify = evaluate(sr.model, verify_x, verify_y);
        } catch (const std::exception& e) {
            sr.failed = true;
            sr.error = e.what();
        }
        if (!sr.failed) {
            bool better = !have_best;
            if (have_best) {
                if (sr.verify.rmse < res.best_verify.rmse)
                    better = true;
                else if (sr.verify.rmse == res.best_verify.rmse) {
                    if (sr.verify.std_error < res.best_verify.std_error)
                        better = true;
                    else if (sr.verify.std_error == res.best_verify.std_error &&
                             sr.model.active_count() < res.best.active_count())
                        better = true;
                }
            }
            if (better) {
                res.best = sr.model;
                res.best_train = sr.train;
                res.best_verify = sr.verify;
                res.best_mask = mask;
                have_best = true;
            }
        }
        res.table.push_back(std::move(sr));
    }
    if (!have_best)
        throw std::runtime_error("subset_search: every subset failed to fit");
    return res;
}

// ---- JSON serialization ---------------------------------------------------

inline nlohmann::json to_json(const LinearModel& m) {
    nlohmann::json j;
    j["intercept"] = m.intercept;
    j["weights"] = m.weights;
    j["active"] = m.active;
    return j;
}

inline LinearModel linear_model_from_json(const nlohmann::json& j) {
    LinearModel m;
    m.intercept = j.at("intercept").get<double>();
    auto w = j.at("weights").get<std::vector<double>>();
    auto a = j.at("active").get<std::vector<bool>>();
    if (w.size() != kNumFeatures || a.size() != kNumFeatures)
        throw std::runtime_error("linear_model_from_json: wrong arity");
    for (int i = 0; i < kNumFeatures; ++i) {
        m.weights[i] = w[i];
        m.active[i] = a[i];
    }
    return m;
}

inline nlohmann::json to_json(const RegressionMetrics& r) {
    return nlohmann::json{{"r_squared", r.r_squared},
                          {"mean_error", r.mean_error},
                          {"std_error", r.std_error},
                          {"rmse", r.rmse}};
}

} // namespace fruitgrade::massmodel
