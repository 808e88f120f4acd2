// SPDX-License-Identifier: Apache-2.0

#include "glintlab/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace glintlab {

Image::Image(int width, int height) : width_(width), height_(height)
{
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image dimensions must be at least 1");
    }
    pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
}

ImageFormat format_from_path(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pfm") {
        return ImageFormat::Pfm;
    }
    if (ext == ".ppm") {
        return ImageFormat::Ppm;
    }
    throw std::invalid_argument("unknown image extension '" + ext + "' (expected .pfm or .ppm)");
}

unsigned char encode_ppm_channel(double value, const PpmOptions& options)
{
    double v = value * options.exposure;
    if (options.tonemap) {
        v = v / (1.0 + v);
    }
    v = std::pow(clamp01(v), 1.0 / 2.2);
    return static_cast<unsigned char>(std::lround(v * 255.0));
}

namespace {

void check_pixels(const Image& img)
{
    for (const Rgb& p : img.pixels()) {
        for (double c : {p.r, p.g, p.b}) {
            if (!std::isfinite(c) || c < 0.0) {
                throw std::invalid_argument("image contains a negative or non-finite channel");
            }
        }
    }
}

void put_f32(std::ostream& out, float f)
{
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) {
        out.put(static_cast<char>((bits >> (8 * i)) & 0xffu));
    }
}

} // namespace

void write_image(const Image& img, const std::filesystem::path& path, ImageFormat format, const PpmOptions& ppm)
{
    check_pixels(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open image for writing: " + path.string());
    }
    if (format == ImageFormat::Pfm) {
        out << "PF\n" << img.width() << ' ' << img.height() << "\n-1.0\n";
        for (int y = img.height() - 1; y >= 0; --y) {
            for (int x = 0; x < img.width(); ++x) {
                const Rgb& p = img.at(x, y);
                put_f32(out, static_cast<float>(p.r));
                put_f32(out, static_cast<float>(p.g));
                put_f32(out, static_cast<float>(p.b));
            }
        }
    } else {
        out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                const Rgb& p = img.at(x, y);
                out.put(static_cast<char>(encode_ppm_channel(p.r, ppm)));
                out.put(static_cast<char>(encode_ppm_channel(p.g, ppm)));
                out.put(static_cast<char>(encode_ppm_channel(p.b, ppm)));
            }
        }
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing image: " + path.string());
    }
}

Image read_pfm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open image: " + path.string());
    }
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    in.get();
    if (!in || magic != "PF" || width < 1 || height < 1) {
        throw std::runtime_error("malformed PFM header in " + path.string());
    }
    if (scale >= 0.0) {
        throw std::runtime_error("big-endian PFM is not supported");
    }
    Image img(width, height);
    for (int y = height - 1; y >= 0; --y) {
        for (int x = 0; x < width; ++x) {
            std::array<float, 3> c{};
            for (float& f : c) {
                std::uint32_t bits = 0;
                for (int i = 0; i < 4; ++i) {
                    const int b = in.get();
                    if (b == std::char_traits<char>::eof()) {
                        throw std::runtime_error("truncated PFM data in " + path.string());
                    }
                    bits |= static_cast<std::uint32_t>(b) << (8 * i);
                }
                f = std::bit_cast<float>(bits);
            }
            img.at(x, y) = {c[0], c[1], c[2]};
        }
    }
    return img;
}

} // namespace glintlab
