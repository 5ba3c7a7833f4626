#include "oiqa/sphere_geometry.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace oiqa {

Vec3 dir_to_unit(const SphereDirection& d) {
    const double cl = std::cos(d.lat);
    return {cl * std::cos(d.lon), cl * std::sin(d.lon), std::sin(d.lat)};
}

SphereDirection unit_to_dir(const Vec3& v) {
    SphereDirection d;
    double z = v[2];
    if (z > 1.0) z = 1.0;
    if (z < -1.0) z = -1.0;
    d.lat = std::asin(z);
    // Poles get lon = 0 by convention.
    d.lon = (std::abs(v[0]) < 1e-300 && std::abs(v[1]) < 1e-300)
                ? 0.0
                : std::atan2(v[1], v[0]);
    if (d.lon >= kPi) d.lon -= 2.0 * kPi;
    return d;
}

SphereDirection erp_to_dir(PixelCoord px, int width, int height) {
    if (!(px.x >= 0.0 && px.x < width && px.y >= 0.0 && px.y < height))
        throw Error("erp_to_dir: pixel (" + std::to_string(px.x) + ", " +
                    std::to_string(px.y) + ") outside " +
                    std::to_string(width) + "x" + std::to_string(height));
    SphereDirection d;
    d.lon = (px.x / width) * 2.0 * kPi - kPi;
    d.lat = kPi / 2.0 - (px.y / height) * kPi;
    return d;
}

PixelCoord dir_to_erp(const SphereDirection& d, int width, int height) {
    PixelCoord p;
    p.x = (d.lon + kPi) / (2.0 * kPi) * width;
    p.x = std::fmod(p.x, static_cast<double>(width));
    if (p.x < 0) p.x += width;
    p.y = (kPi / 2.0 - d.lat) / kPi * height;
    if (p.y < 0) p.y = 0;
    if (p.y > height) p.y = height;
    return p;
}

namespace {

struct CameraFrame {
    Vec3 forward, right, up;
};

// Yaw about +Z by center.lon, then pitch about the camera right axis by
// center.lat.
CameraFrame camera_frame(const SphereDirection& center) {
    const double cy = std::cos(center.lon), sy = std::sin(center.lon);
    const double cp = std::cos(center.lat), sp = std::sin(center.lat);
    CameraFrame f;
    f.right = {-sy, cy, 0.0};
    f.forward = {cp * cy, cp * sy, sp};
    f.up = {-sp * cy, -sp * sy, cp};
    return f;
}

}  // namespace

Viewport extract_viewport(const ErpImage& src, const ViewportSpec& spec) {
    if (!(spec.fov_deg > 0.0 && spec.fov_deg < 180.0))
        throw Error("viewport fov must be in (0, 180) degrees");
    if (spec.out_width < 2 || spec.out_height < 2)
        throw Error("viewport output dims must be >= 2");

    const int ow = spec.out_width, oh = spec.out_height;
    const double tan_half_x = std::tan(deg_to_rad(spec.fov_deg) / 2.0);
    const double tan_half_y = tan_half_x * oh / ow;
    const CameraFrame cam = camera_frame(spec.center);
    const int w = src.width(), h = src.height();

    Viewport vp;
    vp.spec = spec;
    vp.image = Raster(ow, oh);

#pragma omp parallel for schedule(static)
    for (int v = 0; v < oh; ++v) {
        const double yt = (1.0 - 2.0 * (v + 0.5) / oh) * tan_half_y;
        for (int u = 0; u < ow; ++u) {
            const double xt = (2.0 * (u + 0.5) / ow - 1.0) * tan_half_x;
            Vec3 ray;
            for (int i = 0; i < 3; ++i)
                ray[i] = cam.forward[i] + xt * cam.right[i] + yt * cam.up[i];
            const double n =
                std::sqrt(ray[0] * ray[0] + ray[1] * ray[1] + ray[2] * ray[2]);
            for (int i = 0; i < 3; ++i) ray[i] /= n;
            const PixelCoord p = dir_to_erp(unit_to_dir(ray), w, h);
            float rgb[3];
            bilinear_sample_wrap(src.raster, p.x, p.y, rgb);
            for (int c = 0; c < 3; ++c) vp.image.at(u, v, c) = rgb[c];
        }
    }
    return vp;
}

std::vector<Viewport> equatorial_viewport_set(const ErpImage& src, int m,
                                              const ViewportSpec& spec_template) {
    if (m < 1) throw Error("viewport count must be >= 1");
    std::vector<Viewport> out;
    out.reserve(m);
    for (int k = 0; k < m; ++k) {
        ViewportSpec s = spec_template;
        s.center.lat = 0.0;
        s.center.lon = -kPi + k * (2.0 * kPi / m);
        out.push_back(extract_viewport(src, s));
    }
    return out;
}

ErpImage rotate_longitude(const ErpImage& src, double delta_lon) {
    const int w = src.width(), h = src.height();
    const double shift_px = delta_lon / (2.0 * kPi) * w;
    const double rounded = std::round(shift_px);
    Raster out(w, h);

    if (std::abs(shift_px - rounded) < 1e-9) {
        const int s = ((static_cast<int>(rounded) % w) + w) % w;
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int xs = (x - s + w) % w;
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) = src.raster.at(xs, y, c);
            }
    } else {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double xs = std::fmod(x + 0.5 - shift_px, static_cast<double>(w));
                if (xs < 0) xs += w;
                float rgb[3];
                bilinear_sample_wrap(src.raster, xs, y + 0.5, rgb);
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp01(rgb[c]);
            }
    }
    return ErpImage::wrap(std::move(out));
}

void save_viewport_set(const std::vector<Viewport>& set, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json listing = nlohmann::json::array();
    for (size_t i = 0; i < set.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "viewport_%03zu.png", i);
        save_png(set[i].image, (std::filesystem::path(dir) / name).string());
        listing.push_back({{"index", i},
                           {"lat", set[i].spec.center.lat},
                           {"lon", set[i].spec.center.lon},
                           {"fov", set[i].spec.fov_deg}});
    }
    std::ofstream out(std::filesystem::path(dir) / "viewports.json");
    if (!out) throw Error("cannot write viewport sidecar in " + dir);
    out << listing.dump(2) << "\n";
}

}  // namespace oiqa
