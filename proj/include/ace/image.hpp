#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ace/errors.hpp"

namespace ace {

// 8-bit RGB, row-major, no padding.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width*height*3

    ImageBuffer() = default;
    ImageBuffer(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);

    bool valid() const {
        return width > 0 && height > 0 &&
               pixels.size() == static_cast<std::size_t>(width) * height * 3;
    }
    std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
    void fill_rect(int x0, int y0, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    bool operator==(const ImageBuffer&) const = default;
};

// One byte per pixel, 0 or 1.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // width*height

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t value = 0)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

    bool valid() const {
        return width > 0 && height > 0 && bits.size() == static_cast<std::size_t>(width) * height;
    }
    std::uint8_t get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;

    bool operator==(const BinaryMask&) const = default;
};

// RGBA patch asset; alpha drives mask binarization during compositing.
struct RgbaPatch {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width*height*4

    RgbaPatch() = default;
    RgbaPatch(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4, 0) {}

    bool valid() const {
        return width > 0 && height > 0 &&
               pixels.size() == static_cast<std::size_t>(width) * height * 4;
    }
    std::uint8_t* at(int x, int y) { return pixels.data() + 4 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 4 * (static_cast<std::size_t>(y) * width + x);
    }

    bool operator==(const RgbaPatch&) const = default;
};

// Nearest-neighbor resample to (w, h).
RgbaPatch resize_nearest(const RgbaPatch& patch, int w, int h);

// Binary PPM (P6). Errors surface as IoError / CorruptLibrary-style parse failures.
ImageBuffer read_ppm(const std::string& path);
void write_ppm(const ImageBuffer& image, const std::string& path);

// Binary PBM (P4); bit 1 (black) marks a set mask pixel.
BinaryMask read_pbm(const std::string& path);
void write_pbm(const BinaryMask& mask, const std::string& path);

// PAM (P7, RGB_ALPHA) for RGBA patch assets.
RgbaPatch read_pam(const std::string& path);
void write_pam(const RgbaPatch& patch, const std::string& path);

}  // namespace ace
