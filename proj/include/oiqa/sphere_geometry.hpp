#pragma once

#include <array>
#include <string>
#include <vector>

#include "oiqa/raster.hpp"

namespace oiqa {

struct PixelCoord {
    double x = 0.0;
    double y = 0.0;
};

using Vec3 = std::array<double, 3>;

// Unit vector for a sphere direction. Frame: +X at (lat 0, lon 0),
// +Y at (lat 0, lon pi/2), +Z at the north pole.
Vec3 dir_to_unit(const SphereDirection& d);
SphereDirection unit_to_dir(const Vec3& v);

// Continuous ERP pixel <-> sphere direction. Pixel-center convention:
// integer pixel (i, j) has continuous coordinate (i + 0.5, j + 0.5).
//   lon = (x / width) * 2pi - pi
//   lat = pi/2 - (y / height) * pi
// erp_to_dir throws on out-of-range input; dir_to_erp is total on valid
// directions and wraps the seam modulo width.
SphereDirection erp_to_dir(PixelCoord px, int width, int height);
PixelCoord dir_to_erp(const SphereDirection& d, int width, int height);

// Rectilinear (pinhole) viewport render. For each output pixel a ray with
// the spec's fov is rotated yaw-then-pitch to the viewport center, mapped
// to the sphere and bilinearly sampled (horizontal wrap, vertical clamp).
// The given fov is horizontal; the vertical fov follows the aspect ratio.
Viewport extract_viewport(const ErpImage& src, const ViewportSpec& spec);

// m viewports at the equator, lon = -pi + k * (2pi / m), k = 0..m-1.
std::vector<Viewport> equatorial_viewport_set(const ErpImage& src, int m,
                                              const ViewportSpec& spec_template);

// Horizontal rotation of an ERP by delta_lon radians. Exact circular shift
// when delta_lon lands on integer pixels, bilinear resample otherwise.
ErpImage rotate_longitude(const ErpImage& src, double delta_lon);

// Writes viewport_000.png ... plus viewports.json listing
// (index, lat, lon, fov) per entry.
void save_viewport_set(const std::vector<Viewport>& set, const std::string& dir);

}  // namespace oiqa
