#include "dspm/image.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "dspm/error.hpp"

namespace dspm {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail(ErrorKind::MissingFile, "cannot open '" + path + "'");
    return f;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) info = png_create_info_struct(png);
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

void check_signature(std::FILE* f, const std::string& path) {
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        fail(ErrorKind::FormatViolation, "'" + path + "' is not a PNG file");
}

}  // namespace

RgbImage load_rgb_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    check_signature(f.get(), path);

    PngReader r;
    if (!r.png || !r.info) fail(ErrorKind::FormatViolation, "libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) fail(ErrorKind::FormatViolation, "failed to decode '" + path + "'");

    png_init_io(r.png, f.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    png_set_palette_to_rgb(r.png);
    png_set_expand_gray_1_2_4_to_8(r.png);
    png_set_strip_16(r.png);
    png_set_strip_alpha(r.png);
    png_set_gray_to_rgb(r.png);
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    if (png_get_channels(r.png, r.info) != 3)
        fail(ErrorKind::FormatViolation, "'" + path + "': expected 3 channels after expansion");

    RgbImage img(w, h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return img;
}

void save_rgb_png(const std::string& path, const RgbImage& image) {
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    if (!w.png || !w.info) fail(ErrorKind::FormatViolation, "libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) fail(ErrorKind::FormatViolation, "failed to encode '" + path + "'");

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    // libpng's write API is not const-qualified but never mutates row data.
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(image.pixels.data() +
                                        static_cast<std::size_t>(y) * image.width * 3);
    png_write_rows(w.png, rows.data(), image.height);
    png_write_end(w.png, nullptr);
}

GrayImage16 load_gray16_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    check_signature(f.get(), path);

    PngReader r;
    if (!r.png || !r.info) fail(ErrorKind::FormatViolation, "libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) fail(ErrorKind::FormatViolation, "failed to decode '" + path + "'");

    png_init_io(r.png, f.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const int color = png_get_color_type(r.png, r.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        fail(ErrorKind::FormatViolation, "'" + path + "': label maps must be grayscale PNG");
    if (png_get_bit_depth(r.png, r.info) < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    png_set_swap(r.png);  // PNG stores 16-bit samples big-endian
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    const int out_depth = png_get_bit_depth(r.png, r.info);

    GrayImage16 img(w, h);
    if (out_depth == 16) {
        std::vector<png_bytep> rows(h);
        for (int y = 0; y < h; ++y)
            rows[y] = reinterpret_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * w);
        png_read_image(r.png, rows.data());
    } else {
        std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h);
        std::vector<png_bytep> rows(h);
        for (int y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<std::size_t>(y) * w;
        png_read_image(r.png, rows.data());
        for (std::size_t i = 0; i < buf.size(); ++i) img.pixels[i] = buf[i];
    }
    png_read_end(r.png, nullptr);
    return img;
}

void save_gray16_png(const std::string& path, const GrayImage16& image) {
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    if (!w.png || !w.info) fail(ErrorKind::FormatViolation, "libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) fail(ErrorKind::FormatViolation, "failed to encode '" + path + "'");

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    png_set_swap(w.png);

    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
            image.pixels.data() + static_cast<std::size_t>(y) * image.width));
    png_write_rows(w.png, rows.data(), image.height);
    png_write_end(w.png, nullptr);
}

GrayImage8 load_gray8_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    check_signature(f.get(), path);

    PngReader r;
    if (!r.png || !r.info) fail(ErrorKind::FormatViolation, "libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) fail(ErrorKind::FormatViolation, "failed to decode '" + path + "'");

    png_init_io(r.png, f.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY)
        fail(ErrorKind::FormatViolation, "'" + path + "': class maps must be grayscale PNG");
    png_set_expand_gray_1_2_4_to_8(r.png);
    png_set_strip_16(r.png);
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    GrayImage8 img(w, h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return img;
}

void save_gray8_png(const std::string& path, const GrayImage8& image) {
    FilePtr f = open_file(path, "wb");
    PngWriter w;
    if (!w.png || !w.info) fail(ErrorKind::FormatViolation, "libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) fail(ErrorKind::FormatViolation, "failed to encode '" + path + "'");

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(image.pixels.data() +
                                        static_cast<std::size_t>(y) * image.width);
    png_write_rows(w.png, rows.data(), image.height);
    png_write_end(w.png, nullptr);
}

}  // namespace dspm
