#include "oiqa/raster.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

namespace oiqa {

ErpImage ErpImage::wrap(Raster r) {
    if (r.width <= 0 || r.height <= 0 || r.width != 2 * r.height)
        throw Error("ErpImage: dimensions must be 2:1, got " +
                    std::to_string(r.width) + "x" + std::to_string(r.height));
    for (float v : r.data)
        if (!(v >= 0.0f && v <= 1.0f))
            throw Error("ErpImage: sample out of [0,1] or non-finite");
    ErpImage e;
    e.raster = std::move(r);
    return e;
}

void bilinear_sample_wrap(const Raster& img, double x, double y, float out[3]) {
    const int w = img.width, h = img.height;
    double fx = x - 0.5, fy = y - 0.5;
    double flx = std::floor(fx), fly = std::floor(fy);
    double ax = fx - flx, ay = fy - fly;
    int x0 = static_cast<int>(flx), y0 = static_cast<int>(fly);

    int x0w = ((x0 % w) + w) % w;
    int x1w = (x0w + 1) % w;
    int y0c = y0 < 0 ? 0 : (y0 >= h ? h - 1 : y0);
    int y1c = y0 + 1 < 0 ? 0 : (y0 + 1 >= h ? h - 1 : y0 + 1);

    const double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay);
    const double w01 = (1 - ax) * ay, w11 = ax * ay;
    for (int c = 0; c < 3; ++c) {
        out[c] = static_cast<float>(w00 * img.at(x0w, y0c, c) +
                                    w10 * img.at(x1w, y0c, c) +
                                    w01 * img.at(x0w, y1c, c) +
                                    w11 * img.at(x1w, y1c, c));
    }
}

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

Raster load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error("cannot open " + path);

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("failed to decode PNG " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("unexpected channel count in " + path);
    }

    Raster img(w, h);
    std::vector<png_byte> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = row[static_cast<size_t>(x) * 3 + c] / 255.0f;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void save_png(const Raster& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw Error("cannot write " + path);

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("failed to encode PNG " + path);
    }
    png_init_io(png, fp.get());
    // Fixed encoder settings; no timestamp chunks are emitted.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_SUB);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                float v = clamp01(img.at(x, y, c));
                row[static_cast<size_t>(x) * 3 + c] =
                    static_cast<png_byte>(std::lround(v * 255.0f));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace oiqa
