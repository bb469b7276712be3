/*
 * Copyright 2026 The soap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "soap/image.hpp"

#include <png.h>

#include <array>
#include <cstring>
#include <string>

#include "soap/errors.hpp"

namespace soap {

Image::Image(int width, int height, Rgba fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
    pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4);
    for (std::size_t i = 0; i < pixels_.size(); i += 4) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
        pixels_[i + 3] = fill.a;
    }
}

Rgba Image::at(int x, int y) const {
    auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 4;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2], pixels_[i + 3]};
}

void Image::set(int x, int y, Rgba c) {
    if (!contains(x, y)) return;
    auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 4;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
    pixels_[i + 3] = c.a;
}

void Image::blend(int x, int y, Rgba c) {
    if (!contains(x, y)) return;
    auto base = at(x, y);
    auto mix = [&](std::uint8_t src, std::uint8_t dst) {
        return static_cast<std::uint8_t>((src * c.a + dst * (255 - c.a) + 127) / 255);
    };
    set(x, y, {mix(c.r, base.r), mix(c.g, base.g), mix(c.b, base.b), base.a});
}

void Image::fill_rect(int x0, int y0, int x1, int y1, Rgba c) {
    for (int y = std::max(0, y0); y < std::min(height_, y1); ++y) {
        for (int x = std::max(0, x0); x < std::min(width_, x1); ++x) set(x, y, c);
    }
}

Image decode_png(std::span<const std::uint8_t> png) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (png.empty() || !png_image_begin_read_from_memory(&img, png.data(), png.size())) {
        std::string why = img.message[0] ? img.message : "empty buffer";
        png_image_free(&img);
        throw ImageDecodeError("cannot decode PNG: " + why);
    }
    img.format = PNG_FORMAT_RGBA;
    Image out(static_cast<int>(img.width), static_cast<int>(img.height));
    if (!png_image_finish_read(&img, nullptr, out.data().data(), 0, nullptr)) {
        std::string why = img.message;
        png_image_free(&img);
        throw ImageDecodeError("cannot decode PNG: " + why);
    }
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = PNG_FORMAT_RGBA;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(img, size, 0, image.data().data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + img.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.data().data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failed: ") + img.message);
    }
    out.resize(size);
    return out;
}

std::pair<int, int> png_dimensions(std::span<const std::uint8_t> png) {
    static constexpr std::array<std::uint8_t, 8> signature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (png.size() < 24 || !std::equal(signature.begin(), signature.end(), png.begin()) ||
        std::memcmp(png.data() + 12, "IHDR", 4) != 0) {
        throw ImageDecodeError("not a PNG stream");
    }
    auto be32 = [&](std::size_t off) {
        return static_cast<int>((png[off] << 24) | (png[off + 1] << 16) | (png[off + 2] << 8) | png[off + 3]);
    };
    int w = be32(16);
    int h = be32(20);
    if (w <= 0 || h <= 0) throw ImageDecodeError("PNG has non-positive dimensions");
    return {w, h};
}

namespace {

// 5x7 glyphs for '0'..'9'; bit 4 is the leftmost column.
constexpr std::uint8_t kDigits[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};
constexpr int kGlyphW = 5;
constexpr int kGlyphH = 7;
constexpr int kGlyphGap = 1;

bool glyph_on(int digit, int gx, int gy) {
    if (gx < 0 || gy < 0 || gx >= kGlyphW || gy >= kGlyphH) return false;
    return (kDigits[digit][gy] >> (kGlyphW - 1 - gx)) & 1;
}

}  // namespace

std::pair<int, int> number_extent(int number, int scale) {
    auto s = std::to_string(number);
    int n = static_cast<int>(s.size());
    int w = (n * kGlyphW + (n - 1) * kGlyphGap + 2) * scale;
    int h = (kGlyphH + 2) * scale;
    return {w, h};
}

void draw_number(Image& image, int x, int y, int number, int scale, Rgba fg, Rgba outline) {
    auto s = std::to_string(number);
    // glyph-space canvas with a one-cell border for the outline
    int cols = static_cast<int>(s.size()) * (kGlyphW + kGlyphGap) - kGlyphGap + 2;
    int rows = kGlyphH + 2;
    auto on = [&](int cx, int cy) {
        int gx = cx - 1;
        int gy = cy - 1;
        if (gx < 0 || gy < 0) return false;
        int idx = gx / (kGlyphW + kGlyphGap);
        int within = gx % (kGlyphW + kGlyphGap);
        if (idx >= static_cast<int>(s.size()) || within >= kGlyphW) return false;
        return glyph_on(s[static_cast<std::size_t>(idx)] - '0', within, gy);
    };
    for (int cy = 0; cy < rows; ++cy) {
        for (int cx = 0; cx < cols; ++cx) {
            bool ink = on(cx, cy);
            bool edge = false;
            if (!ink) {
                for (int dy = -1; dy <= 1 && !edge; ++dy) {
                    for (int dx = -1; dx <= 1 && !edge; ++dx) edge = on(cx + dx, cy + dy);
                }
            }
            if (!ink && !edge) continue;
            auto c = ink ? fg : outline;
            for (int py = 0; py < scale; ++py) {
                for (int px = 0; px < scale; ++px) image.blend(x + cx * scale + px, y + cy * scale + py, c);
            }
        }
    }
}

}  // namespace soap
