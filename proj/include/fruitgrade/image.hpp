#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fruitgrade {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    }

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask; // row-major, nonzero = foreground

    BinaryImage() = default;
    BinaryImage(int w, int h, bool fill = false)
        : width(w), height(h), mask(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("BinaryImage: dimensions must be >= 1");
    }

    bool at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { mask[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto m : mask) n += (m != 0);
        return n;
    }
};

// Binary PGM (P5, maxval 255).
inline void write_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out)
        throw std::runtime_error("write_pgm: write failed for " + path);
}

inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5")
        throw std::runtime_error("read_pgm: not a binary PGM (P5): " + path);
    auto next_token = [&in, &path]() {
        // skips whitespace and '#' comments
        std::string tok;
        for (;;) {
            in >> tok;
            if (!in)
                throw std::runtime_error("read_pgm: truncated header in " + path);
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
    };
    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (maxval != 255)
        throw std::runtime_error("read_pgm: unsupported maxval in " + path);
    in.get(); // single whitespace after maxval
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("read_pgm: truncated pixel data in " + path);
    return img;
}

} // namespace fruitgrade
