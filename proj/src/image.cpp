// SPDX-License-Identifier: Apache-2.0

#include "msbsdf/image.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace msbsdf {

static_assert(std::endian::native == std::endian::little, "PFM I/O assumes a little-endian host");

ImageBuffer::ImageBuffer(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    data_.assign(static_cast<size_t>(width) * height * 3, 0.0f);
}

Rgb ImageBuffer::at(int x, int y) const {
    const size_t i = (static_cast<size_t>(y) * width_ + x) * 3;
    return {data_[i], data_[i + 1], data_[i + 2]};
}

void ImageBuffer::set(int x, int y, const Rgb& c) {
    const size_t i = (static_cast<size_t>(y) * width_ + x) * 3;
    data_[i] = static_cast<float>(c.r);
    data_[i + 1] = static_cast<float>(c.g);
    data_[i + 2] = static_cast<float>(c.b);
}

std::string encode_pfm(const ImageBuffer& img) {
    std::string out = fmt::format("PF\n{} {}\n-1.0\n", img.width(), img.height());
    const size_t row_bytes = static_cast<size_t>(img.width()) * 3 * sizeof(float);
    const size_t header = out.size();
    out.resize(header + row_bytes * img.height());
    for (int y = 0; y < img.height(); ++y) {
        const float* src = img.data().data() + static_cast<size_t>(img.height() - 1 - y) * img.width() * 3;
        std::memcpy(out.data() + header + row_bytes * y, src, row_bytes);
    }
    return out;
}

void write_pfm(const ImageBuffer& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    const std::string bytes = encode_pfm(img);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

namespace {

// Reads one whitespace-delimited token; the header ends at the single
// whitespace byte after the scale.
std::string token(const std::string& s, size_t& pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
    const size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
    if (start == pos)
        throw std::runtime_error("malformed PFM header");
    return s.substr(start, pos - start);
}

int parse_dim(const std::string& t) {
    size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(t, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("malformed PFM dimensions: " + t);
    }
    if (used != t.size() || v <= 0)
        throw std::runtime_error("malformed PFM dimensions: " + t);
    return v;
}

}  // namespace

ImageBuffer decode_pfm(const std::string& bytes) {
    size_t pos = 0;
    const std::string magic = token(bytes, pos);
    if (magic == "Pf")
        throw std::runtime_error("greyscale PFM is not supported");
    if (magic != "PF")
        throw std::runtime_error("not a PFM file");
    const int w = parse_dim(token(bytes, pos));
    const int h = parse_dim(token(bytes, pos));
    const std::string scale_text = token(bytes, pos);
    double scale = 0;
    std::istringstream ss(scale_text);
    ss.imbue(std::locale::classic());
    if (!(ss >> scale) || scale == 0)
        throw std::runtime_error("malformed PFM scale: " + scale_text);
    if (scale > 0)
        throw std::runtime_error("big-endian PFM is not supported (scale " + scale_text + ")");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw std::runtime_error("truncated PFM payload");
    ++pos;

    ImageBuffer img(w, h);
    const size_t row_bytes = static_cast<size_t>(w) * 3 * sizeof(float);
    if (bytes.size() - pos < row_bytes * h)
        throw std::runtime_error("truncated PFM payload");
    for (int y = 0; y < h; ++y) {
        float* dst = img.data().data() + static_cast<size_t>(h - 1 - y) * w * 3;
        std::memcpy(dst, bytes.data() + pos + row_bytes * y, row_bytes);
    }
    return img;
}

ImageBuffer read_pfm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return decode_pfm(ss.str());
}

double mse(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument(fmt::format("image size mismatch: {}x{} vs {}x{}", a.width(), a.height(),
                                                b.width(), b.height()));
    double sum = 0;
    for (size_t i = 0; i < a.data().size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        sum += d * d;
    }
    return a.data().empty() ? 0.0 : sum / static_cast<double>(a.data().size());
}

}  // namespace msbsdf
