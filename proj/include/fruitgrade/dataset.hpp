#pragma once

/**
 * @file dataset.hpp
 * @brief Samples, stratified 70/15/15 splitting, and [0,1] input
 *        normalization shared by all learners.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace fruitgrade::dataset {

constexpr int kFeatureCount = 7; // L, W, T, PA1, PA2, PA3, mass
inline const std::array<const char*, kFeatureCount> kFeatureNames = {
    "L", "W", "T", "PA1", "PA2", "PA3", "mass"};

struct Sample {
    std::string id;
    std::string variety;
    std::array<double, kFeatureCount> features{};

    void validate() const {
        for (double f : features)
            if (!std::isfinite(f) || f <= 0)
                throw std::invalid_argument("Sample: features must be finite and positive (id " +
                                            id + ")");
    }
};

struct SplitRatios {
    double train = 0.70;
    double test = 0.15;
    double verify = 0.15;
};

struct Split {
    std::vector<int> train, test, verify;
};

/// Class labels in order of first appearance.
inline std::vector<std::string> class_labels(const std::vector<Sample>& samples) {
    std::vector<std::string> labels;
    for (const auto& s : samples)
        if (std::find(labels.begin(), labels.end(), s.variety) == labels.end())
            labels.push_back(s.variety);
    return labels;
}

/// Stratified split: within each class, train and test counts are
/// round(n * ratio) and the remainder goes to verify. Shuffle order is a
/// pure function of the seed.
inline Split split(const std::vector<Sample>& samples, const SplitRatios& ratios,
                   std::uint64_t seed) {
    if (std::abs(ratios.train + ratios.test + ratios.verify - 1.0) > 1e-9)
        throw std::invalid_argument("split: ratios must sum to 1");
    std::map<std::string, std::vector<int>> strata;
    for (int i = 0; i < static_cast<int>(samples.size()); ++i)
        strata[samples[i].variety].push_back(i);

    Split out;
    std::uint64_t stratum_index = 0;
    for (auto& [label, idx] : strata) {
        if (idx.size() < 3)
            throw std::runtime_error("split: class '" + label + "' has fewer than 3 samples");
        Rng rng(Rng::derive(seed, stratum_index++));
        // Fisher-Yates on the stratum
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            std::size_t j = rng.next() % (i + 1);
            std::swap(idx[i], idx[j]);
        }
        auto n = static_cast<double>(idx.size());
        auto n_train = static_cast<std::size_t>(std::lround(n * ratios.train));
        auto n_test = static_cast<std::size_t>(std::lround(n * ratios.test));
        if (n_train + n_test > idx.size())
            n_test = idx.size() - n_train;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i < n_train)
                out.train.push_back(idx[i]);
            else if (i < n_train + n_test)
                out.test.push_back(idx[i]);
            else
                out.verify.push_back(idx[i]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.verify.begin(), out.verify.end());
    return out;
}

/// Min/max normalizer fitted on training rows. Constant features are
/// dropped; out-of-range values at apply time are not clipped.
class Normalizer {
public:
    Normalizer() = default;

    static Normalizer fit(const Eigen::MatrixXd& train) {
        if (train.rows() < 1)
            throw std::invalid_argument("Normalizer::fit: no training rows");
        Normalizer n;
        n.min_ = train.colwise().minCoeff();
        n.max_ = train.colwise().maxCoeff();
        for (Eigen::Index j = 0; j < train.cols(); ++j)
            if (n.max_[j] - n.min_[j] > 0)
                n.kept_.push_back(static_cast<int>(j));
        return n;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(kept_.size()));
        for (std::size_t i = 0; i < kept_.size(); ++i) {
            int j = kept_[i];
            out[static_cast<Eigen::Index>(i)] = (x[j] - min_[j]) / (max_[j] - min_[j]);
        }
        return out;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const {
        Eigen::MatrixXd out(rows.rows(), static_cast<Eigen::Index>(kept_.size()));
        for (Eigen::Index r = 0; r < rows.rows(); ++r)
            out.row(r) = apply(Eigen::VectorXd(rows.row(r))).transpose();
        return out;
    }

    static Normalizer restore(const Eigen::VectorXd& min, const Eigen::VectorXd& max,
                              const std::vector<int>& kept) {
        Normalizer n;
        n.min_ = min;
        n.max_ = max;
        n.kept_ = kept;
        return n;
    }

    const std::vector<int>& kept() const { return kept_; }
    const Eigen::VectorXd& feature_min() const { return min_; }
    const Eigen::VectorXd& feature_max() const { return max_; }

private:
    Eigen::VectorXd min_, max_;
    std::vector<int> kept_;
};

inline Eigen::MatrixXd feature_matrix(const std::vector<Sample>& samples,
                                      const std::vector<int>& indices) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(indices.size()), kFeatureCount);
    for (std::size_t r = 0; r < indices.size(); ++r)
        for (int c = 0; c < kFeatureCount; ++c)
            m(static_cast<Eigen::Index>(r), c) = samples[indices[r]].features[c];
    return m;
}

// ---- CSV I/O --------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

/// Reads a features CSV with header id,variety,L,W,T,PA1,PA2,PA3[,mass_g].
/// Rows without a mass column get mass = NaN (filled in later by joining
/// against a manifest or a mass model).
inline std::vector<Sample> read_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_features_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_features_csv: empty file " + path);
    auto header = split_csv_line(line);
    if (header.size() < 8 || header[0] != "id" || header[1] != "variety")
        throw std::runtime_error("read_features_csv: unexpected header in " + path);
    bool has_mass = header.size() >= 9;
    std::vector<Sample> samples;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto f = split_csv_line(line);
        if (f.size() < (has_mass ? 9u : 8u))
            throw std::runtime_error("read_features_csv: short row in " + path);
        Sample s;
        s.id = f[0];
        s.variety = f[1];
        for (int c = 0; c < 6; ++c)
            s.features[c] = std::stod(f[2 + c]);
        s.features[6] = has_mass ? std::stod(f[8]) : std::nan("");
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace fruitgrade::dataset
