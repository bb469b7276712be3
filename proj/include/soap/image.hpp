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

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace soap {

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 255;
};

/// 8-bit RGBA raster, row-major.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgba fill = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    Rgba at(int x, int y) const;
    void set(int x, int y, Rgba c);
    /// Alpha-blends `c` over the pixel; out-of-bounds writes are ignored.
    void blend(int x, int y, Rgba c);
    void fill_rect(int x0, int y0, int x1, int y1, Rgba c);

    std::span<const std::uint8_t> data() const noexcept { return pixels_; }
    std::span<std::uint8_t> data() noexcept { return pixels_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Throws ImageDecodeError on anything that is not a decodable PNG.
Image decode_png(std::span<const std::uint8_t> png);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Width and height from the IHDR chunk, without decoding pixels.
std::pair<int, int> png_dimensions(std::span<const std::uint8_t> png);

/// Draws decimal digits with a 5x7 bitmap font scaled by `scale`, with a
/// one-pixel-per-scale outline in `outline`.
void draw_number(Image& image, int x, int y, int number, int scale, Rgba fg, Rgba outline);

/// Pixel size of draw_number's output for `number`.
std::pair<int, int> number_extent(int number, int scale);

}  // namespace soap
