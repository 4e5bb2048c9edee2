#include "evflow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "evflow/losses.hpp"

namespace evflow {

namespace {

void hsv_to_rgb(double h_deg, double s, double v, std::uint8_t* out) {
    const double c = v * s;
    const double hp = h_deg / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else             { r = c; b = x; }
    const double m = v - c;
    out[0] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(r + m, 0.0, 1.0)));
    out[1] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(g + m, 0.0, 1.0)));
    out[2] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(b + m, 0.0, 1.0)));
}

} // namespace

Image render_flow_image(const PredictionRows& rows, int width, int height) {
    if (rows.t.empty()) throw EmptyPredictions("no predictions to plot");

    double min_x = rows.xy.front().x(), max_x = min_x;
    double min_y = rows.xy.front().y(), max_y = min_y;
    for (const auto& p : rows.xy) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    const double margin_x = std::max(0.05 * (max_x - min_x), 1e-3);
    const double margin_y = std::max(0.05 * (max_y - min_y), 1e-3);
    min_x -= margin_x; max_x += margin_x;
    min_y -= margin_y; max_y += margin_y;

    double max_mag = 0.0;
    for (std::size_t i = 0; i < rows.n.size(); ++i)
        if (rows.valid[i]) max_mag = std::max(max_mag, rows.n[i].norm());

    Image img;
    img.width = width;
    img.height = height;
    img.rgb.assign(static_cast<std::size_t>(3) * width * height, 0);

    for (std::size_t i = 0; i < rows.t.size(); ++i) {
        const int px = static_cast<int>((rows.xy[i].x() - min_x) / (max_x - min_x) * (width - 1) + 0.5);
        const int py = static_cast<int>((rows.xy[i].y() - min_y) / (max_y - min_y) * (height - 1) + 0.5);
        if (px < 0 || py < 0 || px >= width || py >= height) continue;
        std::uint8_t* out = img.pixel(px, py);
        if (!rows.valid[i]) {
            out[0] = out[1] = out[2] = 128;
            continue;
        }
        const double mag = rows.n[i].norm();
        if (max_mag <= kDegenerateNorm || mag <= kDegenerateNorm) {
            out[0] = out[1] = out[2] = 0;
            continue;
        }
        double hue = std::atan2(rows.n[i].y(), rows.n[i].x()) * 180.0 / M_PI;
        if (hue < 0.0) hue += 360.0;
        hsv_to_rgb(hue, 1.0, std::min(1.0, mag / max_mag), out);
    }
    return img;
}

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot write " + path);
    f << "P6\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
    if (!f) throw FileError("short write to " + path);
}

} // namespace evflow
