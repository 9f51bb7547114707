#pragma once

/**
 * @file synthgen.hpp
 * @brief Synthetic fruit generator: per-variety dimension sampling and
 *        three-view silhouette rendering on a calibrated pixel grid.
 *
 * Fruit bodies are superellipsoids |x/a|^n + |y/b|^n + |z/c|^n <= 1 whose
 * axis-aligned projections are superellipses with the same exponent, so
 * rendered silhouette areas are analytically known.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace fruitgrade::synthgen {

struct VarietyParams {
    std::string name;
    double length_mean = 0, length_std = 0;       // mm
    double width_mean = 0, width_std = 0;         // mm
    double thickness_mean = 0, thickness_std = 0; // mm
    double density = 0;     // g/mm^3
    double squareness = 2;  // superellipse exponent n >= 2

    void validate() const {
        if (length_mean <= 0 || length_std <= 0 || width_mean <= 0 || width_std <= 0 ||
            thickness_mean <= 0 || thickness_std <= 0)
            throw std::invalid_argument("VarietyParams: means and stds must be positive");
        if (squareness < 2.0)
            throw std::invalid_argument("VarietyParams: squareness must be >= 2");
        if (density < 0.0008 || density > 0.0015)
            throw std::invalid_argument("VarietyParams: density outside fruit-plausible band");
    }
};

struct GroundTruthFruit {
    std::string variety;
    double length_mm = 0;
    double width_mm = 0;
    double thickness_mm = 0;
    double mass_g = 0;
    double squareness = 2;
    std::uint64_t seed = 0;
};

struct RenderConfig {
    double mm_per_pixel = 0.1;
    int image_width = 768;
    int image_height = 768;
    int foreground_level = 220;
    int background_level = 30;
    double noise_std = 0.0;  // intensity units
    int blur_radius = 0;     // box blur, px

    void validate() const {
        if (mm_per_pixel <= 0)
            throw std::invalid_argument("RenderConfig: mm_per_pixel must be positive");
        if (image_width < 1 || image_height < 1)
            throw std::invalid_argument("RenderConfig: image dimensions must be >= 1");
        if (foreground_level < 0 || foreground_level > 255 || background_level < 0 ||
            background_level > 255)
            throw std::invalid_argument("RenderConfig: levels must be in [0, 255]");
        if (std::abs(foreground_level - background_level) < 64)
            throw std::invalid_argument("RenderConfig: fg/bg contrast must be >= 64");
        if (noise_std < 0 || blur_radius < 0)
            throw std::invalid_argument("RenderConfig: noise_std and blur_radius must be >= 0");
    }
};

/// Per-variety anchors: dimension means/stds, mean mass, and the mean
/// frontal projected area the squareness exponent is calibrated against.
inline std::vector<VarietyParams> default_varieties() {
    struct Anchor {
        const char* name;
        double l, lsd, w, wsd, t, tsd;
        double mass_mean; // g
        double pa1_mean;  // mm^2, L x W view
    };
    static const Anchor anchors[] = {
        {"Ordubad", 46.64, 2.80, 44.68, 3.11, 41.22, 2.53, 47.81, 1878.12},
        {"Shahrod", 52.34, 3.44, 38.44, 2.71, 38.39, 2.74, 38.36, 1860.30},
        {"Maragheh", 36.59, 2.04, 33.22, 2.03, 31.52, 1.77, 22.51, 1147.78},
        {"Oromieh", 34.87, 1.93, 32.66, 1.93, 32.51, 2.20, 21.39, 1062.29},
        {"Nasiri", 45.62, 3.07, 42.83, 3.39, 40.01, 2.93, 44.69, 1759.89},
    };
    std::vector<VarietyParams> out;
    constexpr double kPi = 3.14159265358979323846;
    for (const auto& a : anchors) {
        VarietyParams p;
        p.name = a.name;
        p.length_mean = a.l;
        p.length_std = a.lsd;
        p.width_mean = a.w;
        p.width_std = a.wsd;
        p.thickness_mean = a.t;
        p.thickness_std = a.tsd;
        // density anchored to mean mass over the mean ellipsoid volume
        p.density = a.mass_mean / ((kPi / 6.0) * a.l * a.w * a.t);
        // exponent calibrated so the mean frontal silhouette area matches
        p.squareness = solve_superellipse_exponent(a.l / 2.0, a.w / 2.0, a.pa1_mean);
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

/// Draws one fruit. Dimensions are independent normals (redrawn while
/// non-positive); mass is density * superellipsoid volume with
/// multiplicative noise exp(rel_noise * g).
inline GroundTruthFruit sample_fruit(const VarietyParams& params, std::uint64_t seed,
                                     double mass_rel_noise = 0.02) {
    params.validate();
    if (mass_rel_noise < 0)
        throw std::invalid_argument("sample_fruit: negative mass noise");
    Rng rng(seed);
    auto draw_positive = [&rng](double mean, double std) {
        for (int i = 0; i < 100; ++i) {
            double v = rng.gaussian(mean, std);
            if (v > 0)
                return v;
        }
        throw std::runtime_error("sample_fruit: 100 redraws exhausted (degenerate params)");
    };
    GroundTruthFruit f;
    f.variety = params.name;
    f.seed = seed;
    f.squareness = params.squareness;
    f.length_mm = draw_positive(params.length_mean, params.length_std);
    f.width_mm = draw_positive(params.width_mean, params.width_std);
    f.thickness_mm = draw_positive(params.thickness_mean, params.thickness_std);
    double volume = superellipsoid_volume(f.length_mm / 2.0, f.width_mm / 2.0,
                                          f.thickness_mm / 2.0, params.squareness);
    double noise = mass_rel_noise > 0 ? std::exp(mass_rel_noise * rng.gaussian()) : 1.0;
    f.mass_g = params.density * volume * noise;
    return f;
}

namespace detail {

/// Rasterizes the superellipse |x/a|^n + |y/b|^n <= 1 (semi-axes in mm)
/// centered in the frame; a pixel is foreground iff its center is inside.
inline void rasterize_superellipse(GrayImage& img, double a_mm, double b_mm, double n,
                                   const RenderConfig& cfg) {
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double a_px = a_mm / cfg.mm_per_pixel;
    const double b_px = b_mm / cfg.mm_per_pixel;
    if (cx - a_px < 0 || cx + a_px > img.width - 1 || cy - b_px < 0 || cy + b_px > img.height - 1)
        throw std::runtime_error("render_views: silhouette does not fit in frame");
    auto fg = static_cast<std::uint8_t>(cfg.foreground_level);
    for (int y = 0; y < img.height; ++y) {
        double dy = std::abs(y - cy) / b_px;
        if (dy > 1.0)
            continue;
        double half = a_px * std::pow(1.0 - std::pow(dy, n), 1.0 / n);
        int x0 = static_cast<int>(std::ceil(cx - half));
        int x1 = static_cast<int>(std::floor(cx + half));
        for (int x = std::max(x0, 0); x <= std::min(x1, img.width - 1); ++x)
            img.at(x, y) = fg;
    }
}

inline void add_noise(GrayImage& img, double noise_std, Rng& rng) {
    for (auto& p : img.pixels) {
        double v = p + rng.gaussian(0.0, noise_std);
        p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
}

inline GrayImage box_blur(const GrayImage& img, int radius) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        int y0 = std::max(0, y - radius), y1 = std::min(img.height - 1, y + radius);
        for (int x = 0; x < img.width; ++x) {
            int x0 = std::max(0, x - radius), x1 = std::min(img.width - 1, x + radius);
            long sum = 0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx)
                    sum += img.at(xx, yy);
            long area = static_cast<long>(y1 - y0 + 1) * (x1 - x0 + 1);
            out.at(x, y) = static_cast<std::uint8_t>((sum + area / 2) / area);
        }
    }
    return out;
}

} // namespace detail

/// Three axis-aligned views with silhouette semi-axes
/// (L/2, W/2), (L/2, T/2), (W/2, T/2). Noise streams derive from the
/// fruit's own seed so rendering replays bit-identically.
inline std::array<GrayImage, 3> render_views(const GroundTruthFruit& fruit,
                                             const RenderConfig& cfg) {
    cfg.validate();
    const double semi[3][2] = {
        {fruit.length_mm / 2.0, fruit.width_mm / 2.0},
        {fruit.length_mm / 2.0, fruit.thickness_mm / 2.0},
        {fruit.width_mm / 2.0, fruit.thickness_mm / 2.0},
    };
    std::array<GrayImage, 3> views;
    for (int v = 0; v < 3; ++v) {
        GrayImage img(cfg.image_width, cfg.image_height,
                      static_cast<std::uint8_t>(cfg.background_level));
        detail::rasterize_superellipse(img, semi[v][0], semi[v][1], fruit.squareness, cfg);
        if (cfg.noise_std > 0) {
            Rng rng(Rng::derive(fruit.seed, 1000 + static_cast<std::uint64_t>(v)));
            detail::add_noise(img, cfg.noise_std, rng);
        }
        if (cfg.blur_radius > 0)
            img = detail::box_blur(img, cfg.blur_radius);
        views[v] = std::move(img);
    }
    return views;
}

} // namespace fruitgrade::synthgen
