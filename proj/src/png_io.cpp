// SPDX-License-Identifier: Apache-2.0
#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "deshade/imaging.hpp"

namespace deshade::img {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    require(fp != nullptr, "cannot open PNG: " + path);

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("PNG decode error: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int w = png_get_image_width(png, info);
    const int h = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    require(channels == 1 || channels == 3,
            "unsupported PNG channel count in " + path);

    std::vector<png_byte> raw(static_cast<std::size_t>(h) * w * channels);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = raw.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Image out(h, w, channels);
    for (std::size_t i = 0; i < raw.size(); ++i)
        out.data[i] = static_cast<float>(raw[i]) / 255.0f;
    return out;
}

void save_png(const std::string& path, const Image& image) {
    require(image.shape.c == 1 || image.shape.c == 3,
            "save_png: images must have 1 or 3 channels");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    require(fp != nullptr, "cannot write PNG: " + path);

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require(png != nullptr, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encode error: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.shape.w, image.shape.h, 8,
                 image.shape.c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const int w = image.shape.w, c = image.shape.c;
    std::vector<png_byte> row(static_cast<std::size_t>(w) * c);
    for (int y = 0; y < image.shape.h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                const float v = std::clamp(image.at(y, x, ch), 0.0f, 1.0f);
                row[static_cast<std::size_t>(x) * c + ch] =
                    static_cast<png_byte>(std::floor(v * 255.0f + 0.5f));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace deshade::img
