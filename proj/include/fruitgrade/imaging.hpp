#pragma once

/**
 * @file imaging.hpp
 * @brief Silhouette extraction and calibrated metrology: Otsu thresholding,
 *        foreground-polarity binarization, connected-component cleanup,
 *        and pixel-to-mm measurement.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "image.hpp"

namespace fruitgrade::imaging {

struct CalibrationScale {
    double mm_per_pixel = 1.0;
    double mm2_per_pixel = 1.0;
};

struct ViewMeasurement {
    double extent_h = 0; // mm
    double extent_v = 0; // mm
    double area = 0;     // mm^2
};

struct FruitFeatures {
    double length = 0;    // mm
    double width = 0;     // mm
    double thickness = 0; // mm
    double pa1 = 0, pa2 = 0, pa3 = 0; // mm^2
};

/// Otsu's criterion over the 256-bin histogram: returns the k in [0, 254]
/// maximizing between-class variance w0*w1*(mu0-mu1)^2, class 0 = {p <= k}.
/// Ties break to the lowest k.
inline int otsu_threshold(const GrayImage& img) {
    std::array<std::uint64_t, 256> hist{};
    for (auto p : img.pixels)
        ++hist[p];
    int distinct = 0;
    for (auto h : hist)
        distinct += (h > 0);
    if (distinct < 2)
        throw std::runtime_error("otsu_threshold: degenerate histogram (single intensity)");

    const double total = static_cast<double>(img.pixels.size());
    double sum_all = 0;
    for (int i = 0; i < 256; ++i)
        sum_all += static_cast<double>(i) * static_cast<double>(hist[i]);

    int best_k = 0;
    double best_var = -1.0;
    double w0 = 0, sum0 = 0;
    for (int k = 0; k <= 254; ++k) {
        w0 += static_cast<double>(hist[k]);
        sum0 += static_cast<double>(k) * static_cast<double>(hist[k]);
        double w1 = total - w0;
        double var = 0.0;
        if (w0 > 0 && w1 > 0) {
            double mu0 = sum0 / w0;
            double mu1 = (sum_all - sum0) / w1;
            var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        }
        if (var > best_var) { // strict: ties keep the lowest k
            best_var = var;
            best_k = k;
        }
    }
    return best_k;
}

/// Thresholds at k and orients the mask so the fruit is foreground: if the
/// above-threshold class dominates the image border it is taken as
/// background and the mask is complemented.
inline BinaryImage binarize(const GrayImage& img, int k) {
    if (k < 0 || k > 254)
        throw std::invalid_argument("binarize: threshold outside [0, 254]");
    BinaryImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.mask[i] = img.pixels[i] > k ? 1 : 0;

    std::size_t border_true = 0, border_total = 0;
    auto tally = [&](int x, int y) {
        border_true += out.at(x, y);
        ++border_total;
    };
    for (int x = 0; x < out.width; ++x) {
        tally(x, 0);
        if (out.height > 1)
            tally(x, out.height - 1);
    }
    for (int y = 1; y + 1 < out.height; ++y) {
        tally(0, y);
        if (out.width > 1)
            tally(out.width - 1, y);
    }
    if (2 * border_true > border_total) {
        for (auto& m : out.mask)
            m = m ? 0 : 1;
    }
    return out;
}

namespace detail {

/// Flood-fills the component containing (start) over pixels where
/// present(i) is true and not yet labeled; 4- or 8-connectivity.
inline std::size_t flood_fill(const BinaryImage& img, std::vector<int>& labels, int label,
                              std::size_t start, bool value, bool eight_conn) {
    const int w = img.width, h = img.height;
    std::vector<std::size_t> stack{start};
    labels[start] = label;
    std::size_t count = 0;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        ++count;
        int x = static_cast<int>(i % static_cast<std::size_t>(w));
        int y = static_cast<int>(i / static_cast<std::size_t>(w));
        auto visit = [&](int nx, int ny) {
            if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                return;
            std::size_t j = static_cast<std::size_t>(ny) * w + nx;
            if (labels[j] == 0 && (img.mask[j] != 0) == value) {
                labels[j] = label;
                stack.push_back(j);
            }
        };
        visit(x - 1, y);
        visit(x + 1, y);
        visit(x, y - 1);
        visit(x, y + 1);
        if (eight_conn) {
            visit(x - 1, y - 1);
            visit(x + 1, y - 1);
            visit(x - 1, y + 1);
            visit(x + 1, y + 1);
        }
    }
    return count;
}

} // namespace detail

/// Keeps the largest 4-connected foreground component (ties to the one seen
/// first in row-major order), then fills interior holes: 8-connected
/// background regions not touching the border become foreground.
inline BinaryImage clean_silhouette(const BinaryImage& bin) {
    if (bin.count() == 0)
        throw std::runtime_error("clean_silhouette: empty mask");
    const int w = bin.width, h = bin.height;
    std::vector<int> labels(bin.mask.size(), 0);
    int next_label = 0;
    int best_label = 0;
    std::size_t best_size = 0;
    for (std::size_t i = 0; i < bin.mask.size(); ++i) {
        if (bin.mask[i] != 0 && labels[i] == 0) {
            ++next_label;
            std::size_t sz = detail::flood_fill(bin, labels, next_label, i, true, false);
            if (sz > best_size) { // strict: ties keep the earlier component
                best_size = sz;
                best_label = next_label;
            }
        }
    }
    BinaryImage out(w, h);
    for (std::size_t i = 0; i < bin.mask.size(); ++i)
        out.mask[i] = labels[i] == best_label ? 1 : 0;

    // hole fill: 8-connected background reachable from the border stays
    std::vector<int> bg(out.mask.size(), 0);
    auto seed_bg = [&](int x, int y) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (out.mask[i] == 0 && bg[i] == 0)
            detail::flood_fill(out, bg, 1, i, false, true);
    };
    for (int x = 0; x < w; ++x) {
        seed_bg(x, 0);
        seed_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed_bg(0, y);
        seed_bg(w - 1, y);
    }
    for (std::size_t i = 0; i < out.mask.size(); ++i)
        if (out.mask[i] == 0 && bg[i] == 0)
            out.mask[i] = 1;
    return out;
}

/// Scale from a target of known physical size: mm/px averaged over both axes.
inline CalibrationScale calibrate(double known_w_mm, double known_h_mm, double measured_w_px,
                                  double measured_h_px) {
    if (known_w_mm <= 0 || known_h_mm <= 0 || measured_w_px <= 0 || measured_h_px <= 0)
        throw std::invalid_argument("calibrate: inputs must be positive");
    CalibrationScale s;
    s.mm_per_pixel = 0.5 * (known_w_mm / measured_w_px + known_h_mm / measured_h_px);
    s.mm2_per_pixel = s.mm_per_pixel * s.mm_per_pixel;
    return s;
}

inline ViewMeasurement measure_view(const BinaryImage& bin, const CalibrationScale& scale) {
    int min_x = std::numeric_limits<int>::max(), max_x = -1;
    int min_y = std::numeric_limits<int>::max(), max_y = -1;
    std::size_t count = 0;
    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < bin.width; ++x) {
            if (bin.at(x, y)) {
                ++count;
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
        }
    }
    if (count == 0)
        throw std::runtime_error("measure_view: empty mask");
    ViewMeasurement m;
    m.extent_h = (max_x - min_x + 1) * scale.mm_per_pixel;
    m.extent_v = (max_y - min_y + 1) * scale.mm_per_pixel;
    m.area = static_cast<double>(count) * scale.mm2_per_pixel;
    return m;
}

/// Views ordered as (L x W), (L x T), (W x T); shared dimensions are
/// reconciled by averaging their two occurrences.
inline FruitFeatures assemble_features(const ViewMeasurement& m1, const ViewMeasurement& m2,
                                       const ViewMeasurement& m3) {
    FruitFeatures f;
    f.length = 0.5 * (m1.extent_h + m2.extent_h);
    f.width = 0.5 * (m1.extent_v + m3.extent_h);
    f.thickness = 0.5 * (m2.extent_v + m3.extent_v);
    f.pa1 = m1.area;
    f.pa2 = m2.area;
    f.pa3 = m3.area;
    return f;
}

} // namespace fruitgrade::imaging
