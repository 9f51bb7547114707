#pragma once

/**
 * @file classifiers.hpp
 * @brief MLP trained with full-batch Levenberg-Marquardt and an RBF network
 *        with subtractive-clustering centers and closed-form output weights,
 *        plus argmax decoding and confusion-matrix evaluation.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anfis.hpp" // subtractive_cluster is shared with the RBF
#include "json.hpp"
#include "rng.hpp"

namespace fruitgrade::classifiers {

using ScoreFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct TrainRecord {
    std::vector<double> rmse; // accepted steps only, non-increasing
    std::string stop_reason;  // max_epochs | min_error | lm_stall | none
};

// ---- MLP -------------------------------------------------------------------

struct MlpConfig {
    int hidden = 5;
    int max_epochs = 20;
    double min_error = 1e-5;
    double init_range = 0.5;     // weights uniform in [-r, r]
    double lambda_init = 1e-3;
    int max_damping_retries = 10;
};

struct MlpModel {
    Eigen::MatrixXd w1; // hidden x d
    Eigen::VectorXd b1; // hidden
    Eigen::MatrixXd w2; // outputs x hidden
    Eigen::VectorXd b2; // outputs

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        Eigen::VectorXd h = (w1 * x + b1).array().tanh();
        return w2 * h + b2;
    }

    Eigen::Index param_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size();
    }
};

namespace detail {

inline Eigen::VectorXd pack(const MlpModel& m) {
    Eigen::VectorXd p(m.param_count());
    Eigen::Index off = 0;
    p.segment(off, m.w1.size()) = Eigen::Map<const Eigen::VectorXd>(m.w1.data(), m.w1.size());
    off += m.w1.size();
    p.segment(off, m.b1.size()) = m.b1;
    off += m.b1.size();
    p.segment(off, m.w2.size()) = Eigen::Map<const Eigen::VectorXd>(m.w2.data(), m.w2.size());
    off += m.w2.size();
    p.segment(off, m.b2.size()) = m.b2;
    return p;
}

inline void unpack(const Eigen::VectorXd& p, MlpModel& m) {
    Eigen::Index off = 0;
    Eigen::Map<Eigen::VectorXd>(m.w1.data(), m.w1.size()) = p.segment(off, m.w1.size());
    off += m.w1.size();
    m.b1 = p.segment(off, m.b1.size());
    off += m.b1.size();
    Eigen::Map<Eigen::VectorXd>(m.w2.data(), m.w2.size()) = p.segment(off, m.w2.size());
    off += m.w2.size();
    m.b2 = p.segment(off, m.b2.size());
}

} // namespace detail

/// Stacked residuals r = output - target, sample-major.
inline Eigen::VectorXd mlp_residuals(const MlpModel& m, const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& target) {
    const auto n = x.rows();
    const auto k = target.cols();
    Eigen::VectorXd r(n * k);
    for (Eigen::Index s = 0; s < n; ++s)
        r.segment(s * k, k) = m.forward(x.row(s).transpose()) - target.row(s).transpose();
    return r;
}

/// Analytic Jacobian of the stacked residuals with respect to the packed
/// parameter vector [w1, b1, w2, b2] (column-major matrix storage).
inline Eigen::MatrixXd mlp_jacobian(const MlpModel& m, const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& target) {
    const auto n = x.rows();
    const auto k = target.cols();
    const auto h = m.w1.rows();
    const auto d = m.w1.cols();
    const Eigen::Index off_w1 = 0, off_b1 = h * d, off_w2 = h * d + h,
                       off_b2 = h * d + h + k * h;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n * k, m.param_count());
    for (Eigen::Index s = 0; s < n; ++s) {
        Eigen::VectorXd xs = x.row(s).transpose();
        Eigen::VectorXd hid = (m.w1 * xs + m.b1).array().tanh();
        Eigen::VectorXd dhid = 1.0 - hid.array().square(); // tanh'
        for (Eigen::Index o = 0; o < k; ++o) {
            Eigen::Index row = s * k + o;
            for (Eigen::Index j = 0; j < h; ++j) {
                // w2 is (k x h) column-major: element (o, j) at j*k + o
                jac(row, off_w2 + j * k + o) = hid[j];
                double back = m.w2(o, j) * dhid[j];
                jac(row, off_b1 + j) = back;
                for (Eigen::Index i = 0; i < d; ++i)
                    jac(row, off_w1 + i * h + j) = back * xs[i]; // w1 (h x d) col-major
            }
            jac(row, off_b2 + o) = 1.0;
        }
    }
    return jac;
}

inline double rmse_of(const Eigen::VectorXd& residuals) {
    return std::sqrt(residuals.squaredNorm() / static_cast<double>(residuals.size()));
}

/// Full-batch Levenberg-Marquardt: solve (J^T J + lambda I) delta = -J^T r,
/// accept the step only if RMSE decreases (lambda /= 10), otherwise raise
/// lambda x10 and retry.
inline std::pair<MlpModel, TrainRecord> train_mlp(const Eigen::MatrixXd& x,
                                                  const Eigen::MatrixXd& target,
                                                  const MlpConfig& cfg, std::uint64_t seed) {
    if (x.rows() != target.rows() || x.rows() < 1)
        throw std::invalid_argument("train_mlp: shape mismatch or empty data");
    const auto d = x.cols();
    const auto k = target.cols();

    MlpModel m;
    m.w1.resize(cfg.hidden, d);
    m.b1.resize(cfg.hidden);
    m.w2.resize(k, cfg.hidden);
    m.b2.resize(k);
    Rng rng(seed);
    auto init = [&](double& v) { v = rng.uniform(-cfg.init_range, cfg.init_range); };
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) init(m.w1.data()[i]);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) init(m.b1.data()[i]);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) init(m.w2.data()[i]);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) init(m.b2.data()[i]);

    TrainRecord rec;
    rec.stop_reason = cfg.max_epochs > 0 ? "max_epochs" : "none";
    double lambda = cfg.lambda_init;
    Eigen::VectorXd r = mlp_residuals(m, x, target);
    double rmse = rmse_of(r);
    if (!std::isfinite(rmse))
        throw std::runtime_error("train_mlp: non-finite loss at initialization");

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        if (rmse < cfg.min_error) {
            rec.stop_reason = "min_error";
            break;
        }
        Eigen::MatrixXd jac = mlp_jacobian(m, x, target);
        Eigen::MatrixXd hess = jac.transpose() * jac;
        Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd theta = detail::pack(m);

        bool accepted = false;
        for (int attempt = 0; attempt <= cfg.max_damping_retries; ++attempt) {
            Eigen::MatrixXd damped = hess;
            damped.diagonal().array() += lambda;
            Eigen::VectorXd delta = damped.ldlt().solve(-grad);
            MlpModel trial = m;
            detail::unpack(theta + delta, trial);
            Eigen::VectorXd r_trial = mlp_residuals(trial, x, target);
            double rmse_trial = rmse_of(r_trial);
            if (!std::isfinite(rmse_trial)) {
                lambda *= 10.0;
                continue;
            }
            if (rmse_trial < rmse) {
                m = trial;
                r = r_trial;
                rmse = rmse_trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            rec.stop_reason = "lm_stall";
            break;
        }
        rec.rmse.push_back(rmse);
    }
    if (rmse < cfg.min_error)
        rec.stop_reason = "min_error";
    return {m, rec};
}

// ---- RBF -------------------------------------------------------------------

struct RbfConfig {
    double sigma = 80.0; // spread; reference default; see sigma_warning
    double sub_radius = 0.5;
    double sub_squash = 1.25;
    double sub_accept = 0.5;
    double sub_reject = 0.15;
    double ridge = 1e-8; // fallback penalty on a singular activation matrix
};

struct RbfModel {
    Eigen::MatrixXd centers; // m x d
    double sigma = 1.0;
    Eigen::MatrixXd weights; // (m+1) x k, row 0 is the bias
    bool ridge_used = false;
    bool sigma_warning = false; // sigma exceeds 10x the data diameter

    Eigen::VectorXd hidden(const Eigen::VectorXd& x) const {
        Eigen::VectorXd h(centers.rows());
        for (Eigen::Index j = 0; j < centers.rows(); ++j) {
            double d2 = (x.transpose() - centers.row(j)).squaredNorm();
            h[j] = std::exp(-d2 / (2.0 * sigma * sigma));
        }
        return h;
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        Eigen::VectorXd h = hidden(x);
        Eigen::VectorXd aug(h.size() + 1);
        aug[0] = 1.0;
        aug.tail(h.size()) = h;
        return weights.transpose() * aug;
    }
};

/// Centers by subtractive clustering, output weights by one closed-form
/// least-squares solve of the hidden activations (plus bias) onto the
/// targets.
inline RbfModel train_rbf(const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
                          const RbfConfig& cfg) {
    if (x.rows() != target.rows() || x.rows() < 1)
        throw std::invalid_argument("train_rbf: shape mismatch or empty data");
    if (cfg.sigma <= 0)
        throw std::invalid_argument("train_rbf: sigma must be positive");

    RbfModel m;
    m.sigma = cfg.sigma;
    m.centers = anfis::subtractive_cluster(x, cfg.sub_radius, cfg.sub_squash, cfg.sub_accept,
                                           cfg.sub_reject);
    double diameter = 0;
    Eigen::VectorXd lo = x.colwise().minCoeff(), hi = x.colwise().maxCoeff();
    diameter = (hi - lo).norm();
    m.sigma_warning = cfg.sigma > 10.0 * diameter;

    const auto n = x.rows();
    const auto mm = m.centers.rows();
    Eigen::MatrixXd phi(n, mm + 1);
    phi.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i)
        phi.row(i).tail(mm) = m.hidden(x.row(i).transpose()).transpose();

    bool singular = n <= mm;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(phi);
    if (!singular) {
        double dmin = std::numeric_limits<double>::max(), dmax = 0;
        for (Eigen::Index i = 0; i <= mm; ++i) {
            double v = std::abs(qr.matrixQR()(i, i));
            dmin = std::min(dmin, v);
            dmax = std::max(dmax, v);
        }
        singular = dmax == 0 || dmin / dmax < 1e-13;
    }
    if (singular) {
        // ridge fallback for an (exactly or nearly) singular system
        m.ridge_used = true;
        Eigen::MatrixXd gram = phi.transpose() * phi;
        gram.diagonal().array() += cfg.ridge;
        m.weights = gram.ldlt().solve(phi.transpose() * target);
    } else {
        m.weights = qr.solve(target);
    }
    return m;
}

// ---- decoding and evaluation -------------------------------------------------

/// Argmax over class scores; ties break to the lowest class index.
inline int classify(const Eigen::VectorXd& scores) {
    int best = 0;
    for (int i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best])
            best = i;
    return best;
}

struct EvaluationReport {
    Eigen::MatrixXi confusion;   // rows true, cols predicted
    std::vector<double> recall;  // per class, NaN when the class is absent
    double accuracy = 0;
    double mean_recall = 0;      // over defined recalls
};

inline EvaluationReport evaluate_classifier(const ScoreFn& score, const Eigen::MatrixXd& x,
                                            const std::vector<int>& labels, int n_classes) {
    if (x.rows() != static_cast<Eigen::Index>(labels.size()) || x.rows() < 1)
        throw std::invalid_argument("evaluate_classifier: empty or mismatched test set");
    EvaluationReport rep;
    rep.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int pred = classify(score(x.row(i).transpose()));
        rep.confusion(labels[static_cast<std::size_t>(i)], pred) += 1;
    }
    int correct = 0, defined = 0;
    double recall_sum = 0;
    for (int c = 0; c < n_classes; ++c) {
        correct += rep.confusion(c, c);
        int row_sum = rep.confusion.row(c).sum();
        if (row_sum > 0) {
            double rc = static_cast<double>(rep.confusion(c, c)) / row_sum;
            rep.recall.push_back(rc);
            recall_sum += rc;
            ++defined;
        } else {
            rep.recall.push_back(std::nan(""));
        }
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(x.rows());
    rep.mean_recall = defined > 0 ? recall_sum / defined : 0.0;
    return rep;
}

// ---- JSON serialization -----------------------------------------------------

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    auto rows = j.get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return m;
}

} // namespace detail

inline nlohmann::json to_json(const MlpModel& m) {
    return nlohmann::json{{"w1", detail::matrix_to_json(m.w1)},
                          {"b1", std::vector<double>(m.b1.data(), m.b1.data() + m.b1.size())},
                          {"w2", detail::matrix_to_json(m.w2)},
                          {"b2", std::vector<double>(m.b2.data(), m.b2.data() + m.b2.size())}};
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    MlpModel m;
    m.w1 = detail::matrix_from_json(j.at("w1"));
    m.w2 = detail::matrix_from_json(j.at("w2"));
    auto b1 = j.at("b1").get<std::vector<double>>();
    auto b2 = j.at("b2").get<std::vector<double>>();
    m.b1 = Eigen::Map<Eigen::VectorXd>(b1.data(), static_cast<Eigen::Index>(b1.size()));
    m.b2 = Eigen::Map<Eigen::VectorXd>(b2.data(), static_cast<Eigen::Index>(b2.size()));
    return m;
}

inline nlohmann::json to_json(const RbfModel& m) {
    return nlohmann::json{{"centers", detail::matrix_to_json(m.centers)},
                          {"sigma", m.sigma},
                          {"weights", detail::matrix_to_json(m.weights)},
                          {"ridge_used", m.ridge_used},
                          {"sigma_warning", m.sigma_warning}};
}

inline RbfModel rbf_from_json(const nlohmann::json& j) {
    RbfModel m;
    m.centers = detail::matrix_from_json(j.at("centers"));
    m.sigma = j.at("sigma").get<double>();
    m.weights = detail::matrix_from_json(j.at("weights"));
    m.ridge_used = j.at("ridge_used").get<bool>();
    m.sigma_warning = j.at("sigma_warning").get<bool>();
    return m;
}

} // namespace fruitgrade::classifiers
