#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dspm {

// 8-bit RGB image, row-major, interleaved channels.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t& at(int x, int y, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// 16-bit single-channel image; the on-disk form of superpixel label maps.
struct GrayImage16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;

    GrayImage16() = default;
    GrayImage16(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

    std::uint16_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// 8-bit single-channel image; used for class-index maps.
struct GrayImage8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage8() = default;
    GrayImage8(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}
};

RgbImage load_rgb_png(const std::string& path);
void save_rgb_png(const std::string& path, const RgbImage& image);

// Accepts 8- or 16-bit grayscale PNG; 8-bit values are taken verbatim.
GrayImage16 load_gray16_png(const std::string& path);
void save_gray16_png(const std::string& path, const GrayImage16& image);

GrayImage8 load_gray8_png(const std::string& path);
void save_gray8_png(const std::string& path, const GrayImage8& image);

// Luma used everywhere a scalar intensity is needed.
inline double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace dspm
