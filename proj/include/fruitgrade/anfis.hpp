#pragma once

/**
 * @file anfis.hpp
 * @brief First-order Sugeno neuro-fuzzy system: rule generation by grid
 *        partitioning, subtractive clustering, or fuzzy C-means, plus hybrid
 *        least-squares / gradient training and a one-vs-all classifier
 *        ensemble.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "rng.hpp"

namespace fruitgrade::anfis {

struct GaussMf {
    double center = 0;
    double sigma = 1;

    double log_eval(double x) const {
        double d = (x - center) / sigma;
        return -0.5 * d * d;
    }
    double eval(double x) const { return std::exp(log_eval(x)); }
};

struct Rule {
    std::vector<GaussMf> antecedent; // one MF per input
    Eigen::VectorXd consequent;      // p0 + p1*x1 + ... + pd*xd
};

struct FisModel {
    int dim = 0;
    std::vector<Rule> rules;
};

// ---- rule generation --------------------------------------------------------

/// Full Cartesian grid of Gaussian MFs: per input, centers evenly spaced
/// over [lo, hi] and sigma = range / (2*(mfs-1)) so adjacent MFs cross near
/// 0.5 membership. Throws when mfs^d exceeds the rule cap.
inline FisModel grid_partition(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               int mfs_per_input = 2, int rule_cap = 512) {
    const auto d = static_cast<int>(lo.size());
    if (d < 1 || hi.size() != d)
        throw std::invalid_argument("grid_partition: bad input ranges");
    if (mfs_per_input < 2)
        throw std::invalid_argument("grid_partition: need >= 2 MFs per input");
    double n_rules = std::pow(static_cast<double>(mfs_per_input), d);
    if (n_rules > rule_cap)
        throw std::runtime_error("grid_partition: rule explosion (" + std::to_string(n_rules) +
                                 " > cap " + std::to_string(rule_cap) + ")");

    std::vector<std::vector<GaussMf>> mfs(d);
    for (int i = 0; i < d; ++i) {
        double range = hi[i] - lo[i];
        if (range <= 0)
            throw std::invalid_argument("grid_partition: empty range on input " +
                                        std::to_string(i));
        double sigma = range / (2.0 * (mfs_per_input - 1));
        for (int m = 0; m < mfs_per_input; ++m) {
            GaussMf mf;
            mf.center = lo[i] + range * m / (mfs_per_input - 1);
            mf.sigma = sigma;
            mfs[i].push_back(mf);
        }
    }

    FisModel fis;
    fis.dim = d;
    std::vector<int> idx(d, 0);
    const auto total = static_cast<std::size_t>(n_rules);
    for (std::size_t r = 0; r < total; ++r) {
        Rule rule;
        rule.antecedent.resize(d);
        for (int i = 0; i < d; ++i)
            rule.antecedent[i] = mfs[i][idx[i]];
        rule.consequent = Eigen::VectorXd::Zero(d + 1);
        fis.rules.push_back(std::move(rule));
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < mfs_per_input)
                break;
            idx[i] = 0;
        }
    }
    return fis;
}

/// Chiu's potential method. Rows of `data` are points; returns >= 1 center.
inline Eigen::MatrixXd subtractive_cluster(const Eigen::MatrixXd& data, double radius = 0.5,
                                           double squash = 1.25, double accept = 0.5,
                                           double reject = 0.15) {
    const auto n = data.rows();
    if (n < 1)
        throw std::invalid_argument("subtractive_cluster: empty data");
    if (radius <= 0 || squash <= 0)
        throw std::invalid_argument("subtractive_cluster: radius/squash must be positive");
    const double alpha = 4.0 / (radius * radius);
    const double beta = 4.0 / (squash * radius * squash * radius);

    Eigen::VectorXd potential = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            potential[i] += std::exp(-alpha * (data.row(i) - data.row(j)).squaredNorm());

    std::vector<Eigen::Index> centers;
    double p_ref = 0;
    std::vector<bool> disabled(static_cast<std::size_t>(n), false);
    while (static_cast<Eigen::Index>(centers.size()) < n) {
        Eigen::Index cand = -1;
        double p_cand = -1;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!disabled[static_cast<std::size_t>(i)] && potential[i] > p_cand) {
                p_cand = potential[i];
                cand = i;
            }
        if (cand < 0 || p_cand <= 0)
            break;

        bool take = false;
        if (centers.empty()) {
            take = true;
            p_ref = p_cand;
        } else if (p_cand > accept * p_ref) {
            take = true;
        } else if (p_cand < reject * p_ref) {
            break;
        } else {
            // gray zone: accept when far enough from existing centers
            double dmin = std::numeric_limits<double>::max();
            for (auto c : centers)
                dmin = std::min(dmin, (data.row(cand) - data.row(c)).norm());
            if (dmin / radius + p_cand / p_ref >= 1.0) {
                take = true;
            } else {
                disabled[static_cast<std::size_t>(cand)] = true;
                continue;
            }
        }
        if (take) {
            centers.push_back(cand);
            for (Eigen::Index i = 0; i < n; ++i)
                potential[i] -= p_cand * std::exp(-beta * (data.row(i) - data.row(cand)).squaredNorm());
        }
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(centers.size()), data.cols());
    for (std::size_t i = 0; i < centers.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = data.row(centers[i]);
    return out;
}

struct FcmResult {
    Eigen::MatrixXd centers;        // c x d
    Eigen::MatrixXd membership;     // n x c, rows sum to 1
    std::vector<double> objective;  // per-iteration J, non-increasing
    double fuzzifier = 2.0;
};

/// Fuzzy C-means with alternating membership / center updates; stops when
/// max |dU| < tol or max_iter. Coincident point/center rows get a crisp
/// assignment.
inline FcmResult fcm(const Eigen::MatrixXd& data, int clusters, double fuzzifier = 2.0,
                     double tol = 1e-5, int max_iter = 100, std::uint64_t seed = 0) {
    const auto n = data.rows();
    if (clusters < 1 || clusters > n)
        throw std::invalid_argument("fcm: need 1 <= c <= n");
    if (fuzzifier <= 1.0)
        throw std::invalid_argument("fcm: fuzzifier must be > 1");

    Rng rng(Rng::derive(seed, 0xFC17));
    Eigen::MatrixXd u(n, clusters);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0;
        for (int k = 0; k < clusters; ++k) {
            u(i, k) = rng.uniform() + 1e-6;
            sum += u(i, k);
        }
        u.row(i) /= sum;
    }

    FcmResult res;
    res.fuzzifier = fuzzifier;
    Eigen::MatrixXd centers(clusters, data.cols());
    for (int iter = 0; iter < max_iter; ++iter) {
        // centers from current memberships
        for (int k = 0; k < clusters; ++k) {
            Eigen::VectorXd num = Eigen::VectorXd::Zero(data.cols());
            double den = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double w = std::pow(u(i, k), fuzzifier);
                num += w * data.row(i).transpose();
                den += w;
            }
            if (den > 0)
                centers.row(k) = (num / den).transpose();
            else
                centers.row(k) = data.row(0);
        }
        // membership update
        Eigen::MatrixXd u_new(n, clusters);
        Eigen::MatrixXd dist2(n, clusters);
        for (Eigen::Index i = 0; i < n; ++i) {
            int zero_at = -1;
            for (int k = 0; k < clusters; ++k) {
                dist2(i, k) = (data.row(i) - centers.row(k)).squaredNorm();
                if (dist2(i, k) == 0 && zero_at < 0)
                    zero_at = k;
            }
            if (zero_at >= 0) {
                u_new.row(i).setZero();
                u_new(i, zero_at) = 1.0;
                continue;
            }
            for (int k = 0; k < clusters; ++k) {
                double s = 0;
                for (int j = 0; j < clusters; ++j)
                    s += std::pow(dist2(i, k) / dist2(i, j), 1.0 / (fuzzifier - 1.0));
                u_new(i, k) = 1.0 / s;
            }
        }
        double max_delta = (u_new - u).cwiseAbs().maxCoeff();
        u = u_new;
        double obj = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (int k = 0; k < clusters; ++k)
                obj += std::pow(u(i, k), fuzzifier) * dist2(i, k);
        res.objective.push_back(obj);
        if (max_delta < tol)
            break;
    }
    res.centers = centers;
    res.membership = u;
    return res;
}

// ---- FIS construction from clusters ----------------------------------------

/// One rule per subtractive-clustering center; MF sigma on input i is
/// radius * range_i / sqrt(8).
inline FisModel fis_from_subtractive(const Eigen::MatrixXd& centers, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, double radius = 0.5) {
    if (centers.rows() < 1)
        throw std::invalid_argument("fis_from_subtractive: need >= 1 center");
    const auto d = static_cast<int>(centers.cols());
    FisModel fis;
    fis.dim = d;
    for (Eigen::Index r = 0; r < centers.rows(); ++r) {
        Rule rule;
        rule.antecedent.resize(d);
        for (int i = 0; i < d; ++i) {
            rule.antecedent[i].center = centers(r, i);
            double range = std::max(hi[i] - lo[i], 1e-12);
            rule.antecedent[i].sigma = radius * range / std::sqrt(8.0);
        }
        rule.consequent = Eigen::VectorXd::Zero(d + 1);
        fis.rules.push_back(std::move(rule));
    }
    return fis;
}

/// One rule per FCM cluster; MF sigma is the membership-weighted std of the
/// data along each input, floored at 1e-3 * range.
inline FisModel fis_from_fcm(const FcmResult& fcm_result, const Eigen::MatrixXd& data) {
    const auto c = fcm_result.centers.rows();
    const auto d = static_cast<int>(fcm_result.centers.cols());
    if (c < 1)
        throw std::invalid_argument("fis_from_fcm: need >= 1 cluster");
    Eigen::VectorXd lo = data.colwise().minCoeff();
    Eigen::VectorXd hi = data.colwise().maxCoeff();
    FisModel fis;
    fis.dim = d;
    for (Eigen::Index k = 0; k < c; ++k) {
        Rule rule;
        rule.antecedent.resize(d);
        for (int i = 0; i < d; ++i) {
            double wsum = 0, ss = 0;
            for (Eigen::Index nidx = 0; nidx < data.rows(); ++nidx) {
                double w = fcm_result.membership(nidx, k);
                double dd = data(nidx, i) - fcm_result.centers(k, i);
                wsum += w;
                ss += w * dd * dd;
            }
            double sigma = wsum > 0 ? std::sqrt(ss / wsum) : 0.0;
            double floor_sigma = 1e-3 * std::max(hi[i] - lo[i], 1e-9);
            rule.antecedent[i].center = fcm_result.centers(k, i);
            rule.antecedent[i].sigma = std::max(sigma, floor_sigma);
        }
        rule.consequent = Eigen::VectorXd::Zero(d + 1);
        fis.rules.push_back(std::move(rule));
    }
    return fis;
}

// ---- inference --------------------------------------------------------------

struct FisOutput {
    double value = 0;
    Eigen::VectorXd firings; // normalized, sums to 1
};

/// Layered Sugeno evaluation in the log domain: fuzzify, product t-norm,
/// normalize (max-rule renormalization avoids underflow), weighted
/// first-order consequents, sum.
inline FisOutput fis_forward(const FisModel& fis, const Eigen::VectorXd& x) {
    const auto r_count = static_cast<Eigen::Index>(fis.rules.size());
    if (r_count < 1)
        throw std::invalid_argument("fis_forward: model has no rules");
    if (x.size() != fis.dim)
        throw std::invalid_argument("fis_forward: input dimension mismatch");

    Eigen::VectorXd logw(r_count);
    for (Eigen::Index r = 0; r < r_count; ++r) {
        double lw = 0;
        for (int i = 0; i < fis.dim; ++i)
            lw += fis.rules[r].antecedent[i].log_eval(x[i]);
        logw[r] = lw;
    }
    double max_lw = logw.maxCoeff();
    Eigen::VectorXd w = (logw.array() - max_lw).exp();
    double norm = w.sum();

    FisOutput out;
    out.firings = w / norm;
    for (Eigen::Index r = 0; r < r_count; ++r) {
        const auto& p = fis.rules[r].consequent;
        double f = p[0] + p.tail(fis.dim).dot(x);
        out.value += out.firings[r] * f;
    }
    return out;
}

// ---- training ---------------------------------------------------------------

struct PremiseGradient {
    Eigen::MatrixXd centers; // rules x dim
    Eigen::MatrixXd sigmas;  // rules x dim
};

/// Gradient of E = 1/2 * sum_n (y_n - t_n)^2 with respect to MF centers and
/// sigmas (consequents held fixed).
inline PremiseGradient premise_gradient(const FisModel& fis, const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& target) {
    const auto r_count = static_cast<Eigen::Index>(fis.rules.size());
    PremiseGradient g;
    g.centers = Eigen::MatrixXd::Zero(r_count, fis.dim);
    g.sigmas = Eigen::MatrixXd::Zero(r_count, fis.dim);
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        Eigen::VectorXd xn = x.row(n).transpose();
        FisOutput out = fis_forward(fis, xn);
        double err = out.value - target[n];
        for (Eigen::Index r = 0; r < r_count; ++r) {
            const auto& p = fis.rules[r].consequent;
            double fr = p[0] + p.tail(fis.dim).dot(xn);
            double common = err * out.firings[r] * (fr - out.value);
            for (int i = 0; i < fis.dim; ++i) {
                const auto& mf = fis.rules[r].antecedent[i];
                double diff = xn[i] - mf.center;
                double s2 = mf.sigma * mf.sigma;
                g.centers(r, i) += common * diff / s2;
                g.sigmas(r, i) += common * diff * diff / (s2 * mf.sigma);
            }
        }
    }
    return g;
}

/// Solves the consequent parameters globally by linear least squares given
/// the current premises (min-norm solution when underdetermined). A positive
/// ridge penalty shrinks the consequents, which matters when the rule count
/// makes the system underdetermined (e.g. grid partitioning on many inputs).
inline void solve_consequents_lse(FisModel& fis, const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& target, double ridge = 0.0) {
    const auto n = x.rows();
    const auto r_count = static_cast<Eigen::Index>(fis.rules.size());
    const int d = fis.dim;
    Eigen::MatrixXd phi(n, r_count * (d + 1));
    for (Eigen::Index row = 0; row < n; ++row) {
        Eigen::VectorXd xn = x.row(row).transpose();
        FisOutput out = fis_forward(fis, xn);
        for (Eigen::Index r = 0; r < r_count; ++r) {
            phi(row, r * (d + 1)) = out.firings[r];
            for (int i = 0; i < d; ++i)
                phi(row, r * (d + 1) + 1 + i) = out.firings[r] * xn[i];
        }
    }
    Eigen::VectorXd p;
    if (ridge > 0) {
        Eigen::MatrixXd gram = phi.transpose() * phi;
        gram.diagonal().array() += ridge;
        p = gram.ldlt().solve(phi.transpose() * target);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(phi);
        p = cod.solve(target);
    }
    for (Eigen::Index r = 0; r < r_count; ++r)
        fis.rules[r].consequent = p.segment(r * (d + 1), d + 1);
}

inline double fis_rmse(const FisModel& fis, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& target) {
    double ss = 0;
    for (Eigen::Index n = 0; n < x.rows(); ++n) {
        double e = fis_forward(fis, Eigen::VectorXd(x.row(n))).value - target[n];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(x.rows()));
}

struct HybridConfig {
    int epochs = 20;
    double min_error = 1e-5;
    double learning_rate = 0.01;
    bool pure_backprop = false; // tune consequents by gradient instead of LSE
    double lse_ridge = 0.0;     // ridge penalty on the consequent solve
    double sigma_clamp = 1e-4;
};

struct HybridRecord {
    std::vector<double> train_rmse;
    std::vector<double> verify_rmse;
    std::string stop_reason;
};

/// Hybrid ANFIS training: per epoch, consequents by least squares with
/// frozen premises, then one gradient step on MF centers/sigmas. When a
/// verify set is given the epoch snapshot with lowest verify RMSE wins.
inline HybridRecord train_hybrid(FisModel& fis, const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& target,
                                 const Eigen::MatrixXd& verify_x = Eigen::MatrixXd(),
                                 const Eigen::VectorXd& verify_y = Eigen::VectorXd(),
                                 const HybridConfig& cfg = {}) {
    HybridRecord rec;
    rec.stop_reason = "max_epochs";
    FisModel best = fis;
    double best_verify = std::numeric_limits<double>::max();
    const bool has_verify = verify_x.rows() > 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (!cfg.pure_backprop)
            solve_consequents_lse(fis, x, target, cfg.lse_ridge);

        double rmse = fis_rmse(fis, x, target);
        if (!std::isfinite(rmse))
            throw std::runtime_error("train_hybrid: non-finite loss at epoch " +
                                     std::to_string(epoch));
        rec.train_rmse.push_back(rmse);
        if (has_verify) {
            double vr = fis_rmse(fis, verify_x, verify_y);
            rec.verify_rmse.push_back(vr);
            if (vr < best_verify) {
                best_verify = vr;
                best = fis;
            }
        }
        if (rmse < cfg.min_error) {
            rec.stop_reason = "min_error";
            break;
        }

        PremiseGradient g = premise_gradient(fis, x, target);
        double gnorm = std::sqrt(g.centers.squaredNorm() + g.sigmas.squaredNorm());
        if (!std::isfinite(gnorm))
            throw std::runtime_error("train_hybrid: non-finite gradient at epoch " +
                                     std::to_string(epoch));
        if (cfg.pure_backprop) {
            // consequent gradient: dE/dp_r = sum_n err * wbar_r * [1; x]
            Eigen::MatrixXd gc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fis.rules.size()),
                                                       fis.dim + 1);
            for (Eigen::Index n = 0; n < x.rows(); ++n) {
                Eigen::VectorXd xn = x.row(n).transpose();
                FisOutput out = fis_forward(fis, xn);
                double err = out.value - target[n];
                for (Eigen::Index r = 0; r < gc.rows(); ++r) {
                    gc(r, 0) += err * out.firings[r];
                    for (int i = 0; i < fis.dim; ++i)
                        gc(r, 1 + i) += err * out.firings[r] * xn[i];
                }
            }
            gnorm = std::sqrt(gnorm * gnorm + gc.squaredNorm());
            if (gnorm > 0) {
                double step = cfg.learning_rate / gnorm;
                for (Eigen::Index r = 0; r < gc.rows(); ++r)
                    fis.rules[r].consequent -= step * gc.row(r).transpose();
            }
        }
        if (gnorm > 0) {
            double step = cfg.learning_rate / gnorm;
            for (std::size_t r = 0; r < fis.rules.size(); ++r) {
                for (int i = 0; i < fis.dim; ++i) {
                    auto& mf = fis.rules[r].antecedent[i];
                    mf.center -= step * g.centers(static_cast<Eigen::Index>(r), i);
                    mf.sigma -= step * g.sigmas(static_cast<Eigen::Index>(r), i);
                    mf.sigma = std::max(mf.sigma, cfg.sigma_clamp);
                }
            }
        }
    }
    if (!cfg.pure_backprop && cfg.epochs > 0)
        solve_consequents_lse(fis, x, target, cfg.lse_ridge); // premises moved; refresh
    if (has_verify) {
        double vr = fis_rmse(fis, verify_x, verify_y);
        if (vr < best_verify)
            best = fis;
        fis = best;
    }
    return rec;
}

// ---- one-vs-all classifier ensemble ----------------------------------------

enum class RuleMethod { Grid, Subtractive, Fcm };

struct EnsembleConfig {
    RuleMethod method = RuleMethod::Fcm;
    int mfs_per_input = 2;
    int rule_cap = 512;
    double sub_radius = 0.5;
    double sub_squash = 1.25;
    double sub_accept = 0.5;
    double sub_reject = 0.15;
    int fcm_clusters = 5;
    double fcm_fuzzifier = 2.0;
    HybridConfig train;
};

struct AnfisEnsemble {
    std::vector<FisModel> per_class;

    Eigen::VectorXd score(const Eigen::VectorXd& x) const {
        Eigen::VectorXd s(static_cast<Eigen::Index>(per_class.size()));
        for (std::size_t k = 0; k < per_class.size(); ++k)
            s[static_cast<Eigen::Index>(k)] = fis_forward(per_class[k], x).value;
        return s;
    }
};

/// Trains one single-output FIS per class on the one-hot target column.
/// Antecedent structure is shared across class models (it depends on the
/// inputs only); consequents and tuned premises differ per class.
inline AnfisEnsemble train_ensemble(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                    int n_classes, const Eigen::MatrixXd& verify_x,
                                    const std::vector<int>& verify_labels,
                                    const EnsembleConfig& cfg, std::uint64_t seed) {
    if (x.rows() != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("train_ensemble: label count mismatch");
    Eigen::VectorXd lo = x.colwise().minCoeff();
    Eigen::VectorXd hi = x.colwise().maxCoeff();

    FisModel base;
    switch (cfg.method) {
    case RuleMethod::Grid:
        base = grid_partition(lo, hi, cfg.mfs_per_input, cfg.rule_cap);
        break;
    case RuleMethod::Subtractive: {
        auto centers = subtractive_cluster(x, cfg.sub_radius, cfg.sub_squash, cfg.sub_accept,
                                           cfg.sub_reject);
        base = fis_from_subtractive(centers, lo, hi, cfg.sub_radius);
        break;
    }
    case RuleMethod::Fcm: {
        int c = std::min<int>(cfg.fcm_clusters, static_cast<int>(x.rows()));
        auto result = fcm(x, c, cfg.fcm_fuzzifier, 1e-5, 100, Rng::derive(seed, 0xA11));
        base = fis_from_fcm(result, x);
        break;
    }
    }

    AnfisEnsemble ens;
    for (int k = 0; k < n_classes; ++k) {
        Eigen::VectorXd target(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            target[i] = labels[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0;
        Eigen::VectorXd vtarget(verify_x.rows());
        for (Eigen::Index i = 0; i < verify_x.rows(); ++i)
            vtarget[i] = verify_labels[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0;
        FisModel fis = base;
        train_hybrid(fis, x, target, verify_x, vtarget, cfg.train);
        ens.per_class.push_back(std::move(fis));
    }
    return ens;
}

// ---- JSON serialization -----------------------------------------------------

inline nlohmann::json to_json(const FisModel& fis) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : fis.rules) {
        nlohmann::json ant = nlohmann::json::array();
        for (const auto& mf : r.antecedent)
            ant.push_back({{"center", mf.center}, {"sigma", mf.sigma}});
        std::vector<double> cons(r.consequent.data(), r.consequent.data() + r.consequent.size());
        rules.push_back({{"antecedent", ant}, {"consequent", cons}});
    }
    return nlohmann::json{{"dim", fis.dim}, {"rules", rules}};
}

inline FisModel fis_from_json(const nlohmann::json& j) {
    FisModel fis;
    fis.dim = j.at("dim").get<int>();
    for (const auto& rj : j.at("rules")) {
        Rule r;
        for (const auto& mj : rj.at("antecedent")) {
            GaussMf mf;
            mf.center = mj.at("center").get<double>();
            mf.sigma = mj.at("sigma").get<double>();
            r.antecedent.push_back(mf);
        }
        auto cons = rj.at("consequent").get<std::vector<double>>();
        r.consequent = Eigen::Map<Eigen::VectorXd>(cons.data(),
                                                   static_cast<Eigen::Index>(cons.size()));
        fis.rules.push_back(std::move(r));
    }
    return fis;
}

} // namespace fruitgrade::anfis
