#pragma once

/**
 * @file stats.hpp
 * @brief One-way ANOVA, Tukey HSD with compact letter display, and
 *        estimated-vs-actual agreement (squared Pearson correlation).
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fruitgrade::stats {

inline double mean(const std::vector<double>& v) {
    if (v.empty())
        throw std::invalid_argument("mean: empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2)
        throw std::invalid_argument("sample_std: need n >= 2");
    double m = mean(v);
    double ss = 0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---- special functions ------------------------------------------------------

namespace detail {

/// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin)
        d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin)
            d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin)
            d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            break;
    }
    return h;
}

inline double reg_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

inline double normal_pdf(double z) {
    return 0.39894228040143267794 * std::exp(-0.5 * z * z);
}

/// CDF of the range of k iid standard normals:
/// R_k(w) = k * Int phi(z) [Phi(z) - Phi(z - w)]^{k-1} dz.
inline double normal_range_cdf(double w, int k) {
    if (w <= 0)
        return 0.0;
    constexpr double kLo = -8.5, kHi = 8.5;
    constexpr int kSteps = 256; // Simpson, even
    double hstep = (kHi - kLo) / kSteps;
    double acc = 0;
    for (int i = 0; i <= kSteps; ++i) {
        double z = kLo + i * hstep;
        double f = normal_pdf(z) * std::pow(normal_cdf(z) - normal_cdf(z - w), k - 1);
        double wgt = (i == 0 || i == kSteps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wgt * f;
    }
    return std::min(1.0, k * acc * hstep / 3.0);
}

} // namespace detail

/// P(F_{d1,d2} > f) via the regularized incomplete beta.
inline double f_sf(double f, double d1, double d2) {
    if (!(f >= 0))
        throw std::invalid_argument("f_sf: F must be >= 0");
    if (std::isinf(f))
        return 0.0;
    double x = d2 / (d2 + d1 * f);
    return detail::reg_incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

/// CDF of the studentized range q(k, df): outer integral over the scale
/// factor u = s/sigma with nu*u^2 ~ chi2_nu.
inline double studentized_range_cdf(double q, int k, double df) {
    if (q <= 0)
        return 0.0;
    if (df > 5e4) // effectively the plain normal range
        return detail::normal_range_cdf(q, k);
    double sd = 1.0 / std::sqrt(2.0 * df); // approx std of u around 1
    double lo = std::max(1e-9, 1.0 - 14.0 * sd);
    double hi = 1.0 + 14.0 * sd;
    if (df < 8) { // wide scale distribution, integrate broadly
        lo = 1e-9;
        hi = 4.0;
    }
    constexpr int kSteps = 256;
    double hstep = (hi - lo) / kSteps;
    double ln_norm = std::log(2.0) + 0.5 * df * std::log(df / 2.0) - std::lgamma(df / 2.0);
    double acc = 0;
    for (int i = 0; i <= kSteps; ++i) {
        double u = lo + i * hstep;
        double ln_fu = ln_norm + (df - 1.0) * std::log(u) - 0.5 * df * u * u;
        double f = std::exp(ln_fu) * detail::normal_range_cdf(q * u, k);
        double wgt = (i == 0 || i == kSteps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wgt * f;
    }
    return std::min(1.0, acc * hstep / 3.0);
}

/// Upper quantile of the studentized range (bisection to ~1e-5).
inline double studentized_range_quantile(double p, int k, double df) {
    if (p <= 0 || p >= 1)
        throw std::invalid_argument("studentized_range_quantile: p in (0,1) required");
    if (k < 2)
        throw std::invalid_argument("studentized_range_quantile: k >= 2 required");
    double lo = 1e-6, hi = 4.0;
    while (studentized_range_cdf(hi, k, df) < p) {
        hi *= 2.0;
        if (hi > 1e4)
            throw std::runtime_error("studentized_range_quantile: no bracket");
    }
    for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
        double mid = 0.5 * (lo + hi);
        (studentized_range_cdf(mid, k, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---- ANOVA / Tukey ----------------------------------------------------------

struct AnovaResult {
    double f_statistic = 0;
    double p_value = 1;
    double ms_within = 0;
    double df_within = 0;
};

inline AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2)
        throw std::invalid_argument("anova_oneway: need >= 2 groups");
    std::size_t n_total = 0;
    for (const auto& g : groups) {
        if (g.size() < 2)
            throw std::invalid_argument("anova_oneway: each group needs n >= 2");
        n_total += g.size();
    }
    double grand = 0;
    for (const auto& g : groups)
        grand = std::accumulate(g.begin(), g.end(), grand);
    grand /= static_cast<double>(n_total);

    double ssb = 0, ssw = 0;
    for (const auto& g : groups) {
        double m = mean(g);
        ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double x : g)
            ssw += (x - m) * (x - m);
    }
    auto k = static_cast<double>(groups.size());
    auto n = static_cast<double>(n_total);

    AnovaResult r;
    r.df_within = n - k;
    r.ms_within = ssw / r.df_within;
    if (ssw <= 0) {
        // zero within-group variance: degenerate conventions
        r.f_statistic = ssb > 0 ? std::numeric_limits<double>::infinity() : 0.0;
        r.p_value = ssb > 0 ? 0.0 : 1.0;
        return r;
    }
    r.f_statistic = (ssb / (k - 1.0)) / r.ms_within;
    r.p_value = f_sf(r.f_statistic, k - 1.0, n - k);
    return r;
}

struct GroupSummary {
    std::string label;
    std::size_t n = 0;
    double mean = 0;
    double std = 0;
    std::string letters;
};

/// Pairwise Tukey-Kramer significance at level alpha: true = significantly
/// different.
inline std::vector<std::vector<bool>> tukey_significant(
    const std::vector<std::vector<double>>& groups, double alpha) {
    auto anova = anova_oneway(groups);
    auto k = static_cast<int>(groups.size());
    double q_crit = studentized_range_quantile(1.0 - alpha, k, anova.df_within);
    std::vector<double> means(k);
    for (int i = 0; i < k; ++i)
        means[i] = mean(groups[i]);
    std::vector<std::vector<bool>> sig(k, std::vector<bool>(k, false));
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double se = std::sqrt(anova.ms_within * 0.5 *
                                  (1.0 / static_cast<double>(groups[i].size()) +
                                   1.0 / static_cast<double>(groups[j].size())));
            bool s = se > 0 ? std::abs(means[i] - means[j]) > q_crit * se
                            : means[i] != means[j];
            sig[i][j] = sig[j][i] = s;
        }
    }
    return sig;
}

/// Compact letter display: groups sorted by descending mean; each maximal
/// run of pairwise non-significant groups shares one letter.
inline std::vector<std::string> letter_groups(const std::vector<std::vector<double>>& groups,
                                              double alpha = 0.01) {
    auto sig = tukey_significant(groups, alpha);
    auto k = static_cast<int>(groups.size());
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> means(k);
    for (int i = 0; i < k; ++i)
        means[i] = mean(groups[i]);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return means[a] > means[b]; });

    std::vector<std::string> letters(k);
    char next_letter = 'a';
    int prev_end = -1;
    for (int start = 0; start < k; ++start) {
        int end = start;
        while (end + 1 < k) {
            bool ok = true;
            for (int p = start; p <= end + 1 && ok; ++p)
                for (int q = p + 1; q <= end + 1 && ok; ++q)
                    if (sig[order[p]][order[q]])
                        ok = false;
            if (!ok)
                break;
            ++end;
        }
        if (end > prev_end) { // maximal run not contained in the previous one
            if (next_letter > 'z')
                throw std::runtime_error("letter_groups: letter alphabet exhausted");
            for (int p = start; p <= end; ++p)
                letters[order[p]] += next_letter;
            ++next_letter;
            prev_end = end;
        }
    }
    return letters;
}

/// Squared Pearson correlation between estimated and actual values.
inline double agreement(const std::vector<double>& estimated, const std::vector<double>& actual) {
    if (estimated.size() != actual.size() || estimated.size() < 2)
        throw std::invalid_argument("agreement: need >= 2 matched pairs");
    double me = mean(estimated), ma = mean(actual);
    double se = 0, sa = 0, cov = 0;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        double de = estimated[i] - me, da = actual[i] - ma;
        se += de * de;
        sa += da * da;
        cov += de * da;
    }
    if (se <= 0 || sa <= 0)
        throw std::invalid_argument("agreement: constant input");
    return (cov * cov) / (se * sa);
}

} // namespace fruitgrade::stats
