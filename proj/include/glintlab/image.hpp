// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "glintlab/vec.hpp"

#include <filesystem>
#include <vector>

namespace glintlab {

/// Linear RGB image, row 0 at the top.
class Image {
public:
    Image() = default;
    Image(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
    const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
    const std::vector<Rgb>& pixels() const { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y) const
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

enum class ImageFormat { Pfm, Ppm };

/// Picks the format from the file extension (.pfm or .ppm).
ImageFormat format_from_path(const std::filesystem::path& path);

struct PpmOptions {
    double exposure = 1.0;
    bool tonemap = true;
};

/// PFM: little-endian float32, bottom-up scanlines. PPM: 8-bit P6 after
/// exposure, optional Reinhard x/(1+x) and gamma 1/2.2. Throws
/// std::invalid_argument for negative or non-finite pixels and
/// std::runtime_error for IO failures.
void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format, const PpmOptions& ppm = {});

Image read_pfm(const std::filesystem::path& path);

/// Encodes one linear value to an 8-bit PPM channel.
unsigned char encode_ppm_channel(double value, const PpmOptions& options);

} // namespace glintlab
