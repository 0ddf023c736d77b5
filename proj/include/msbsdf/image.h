// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "msbsdf/rgb.h"

namespace msbsdf {

/// Row-major RGB float image, row 0 at the top.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    Rgb at(int x, int y) const;
    void set(int x, int y, const Rgb& c);

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    bool operator==(const ImageBuffer&) const = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<float> data_;
};

/// Little-endian colour PFM ("PF", scale -1.0, rows bottom to top).
void write_pfm(const ImageBuffer& img, const std::string& path);
std::string encode_pfm(const ImageBuffer& img);

/// Throws std::runtime_error on malformed headers, big-endian files and
/// truncated payloads.
ImageBuffer read_pfm(const std::string& path);
ImageBuffer decode_pfm(const std::string& bytes);

/// Mean over pixels and channels of the squared difference.
double mse(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace msbsdf
