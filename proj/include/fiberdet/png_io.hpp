#pragma once

#include <string>

#include "fiberdet/raster.hpp"

namespace fiberdet {

// Reads any PNG as 8-bit grayscale; color inputs are converted with integer
// luma rounding round((299R + 587G + 114B) / 1000).
GrayImage read_png_gray(const std::string& path);

void write_png_gray(const std::string& path, const GrayImage& img);

} // namespace fiberdet
