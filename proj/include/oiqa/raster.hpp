#pragma once

#include <string>
#include <vector>

#include "oiqa/common.hpp"

namespace oiqa {

// Interleaved RGB raster, float samples in [0,1], row-major.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // size = width * height * 3

    Raster() = default;
    Raster(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

    float& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    float at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool same_dims(const Raster& o) const {
        return width == o.width && height == o.height;
    }
};

// Rec.601 luma of one pixel, computed in double.
inline double luma601(const Raster& img, int x, int y) {
    return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
           0.114 * img.at(x, y, 2);
}

// 2:1 equirectangular image. Construction validates the aspect ratio and
// that every sample is finite and in [0,1].
struct ErpImage {
    Raster raster;

    ErpImage() = default;
    static ErpImage wrap(Raster r);

    int width() const { return raster.width; }
    int height() const { return raster.height; }
};

struct SphereDirection {
    double lat = 0.0;  // radians, [-pi/2, pi/2]
    double lon = 0.0;  // radians, [-pi, pi)
};

struct ViewportSpec {
    SphereDirection center;
    double fov_deg = 90.0;
    int out_width = 224;
    int out_height = 224;
};

struct Viewport {
    ViewportSpec spec;
    Raster image;
};

// Bilinear sample at continuous coordinates where (0.5, 0.5) is the center
// of the top-left pixel. Horizontal wrap, vertical clamp (ERP semantics).
void bilinear_sample_wrap(const Raster& img, double x, double y, float out[3]);

// PNG I/O. 8-bit RGB on disk; compression settings are pinned so a rerun
// with identical inputs produces byte-identical files.
Raster load_png(const std::string& path);
void save_png(const Raster& img, const std::string& path);

}  // namespace oiqa
