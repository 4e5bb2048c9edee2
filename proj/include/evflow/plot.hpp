#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evflow/io.hpp"

namespace evflow {

/// 8-bit RGB raster.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;   ///< 3 bytes per pixel, row-major

    std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
};

/// Rasterize per-event flow predictions in HSV: hue is the flow direction,
/// brightness the magnitude (scaled by the max over valid events). Invalid
/// events render gray, empty background black. Throws EmptyPredictions.
Image render_flow_image(const PredictionRows& rows, int width, int height);

/// Binary portable pixmap (P6) writer.
void write_ppm(const std::string& path, const Image& img);

} // namespace evflow
