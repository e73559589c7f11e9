#include "dyve/tensor.hpp"

#include <cmath>
#include <sstream>

namespace dyve {

void Shape::validate() const {
    if (dims.size() != 1 && dims.size() != 3) {
        throw ValidationError("shape rank must be 1 or 3, got " + std::to_string(dims.size()));
    }
    std::uint64_t n = 1;
    for (int d : dims) {
        if (d < 1) throw ValidationError("shape dims must be >= 1");
        n *= static_cast<std::uint64_t>(d);
        if (n > (1ull << 31)) throw ValidationError("shape element count overflows");
    }
}

std::string Shape::to_string() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << "x";
        os << dims[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<float> values) : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != shape.elements()) {
        throw ValidationError("tensor data length " + std::to_string(data.size()) +
                              " does not match shape " + shape.to_string());
    }
}

float& Tensor::at(int c, int r, int col) {
    return data[(static_cast<std::size_t>(c) * shape.height() + r) * shape.width() + col];
}

float Tensor::at(int c, int r, int col) const {
    return data[(static_cast<std::size_t>(c) * shape.height() + r) * shape.width() + col];
}

ChannelView Tensor::channel(int c) const {
    if (c < 0 || c >= shape.channels()) {
        throw BoundsError("channel " + std::to_string(c) + " out of range for shape " + shape.to_string());
    }
    const std::size_t per_channel = static_cast<std::size_t>(shape.height()) * shape.width();
    return ChannelView(data.data() + per_channel * static_cast<std::size_t>(c), shape.height(), shape.width());
}

bool Tensor::all_finite() const {
    for (float v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

RegionStats region_stats(const float* grid, int width, int r0, int c0, int r1, int c1) {
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t n = 0;
    float mx = grid[static_cast<std::size_t>(r0) * width + c0];
    float mn = mx;
    for (int r = r0; r <= r1; ++r) {
        const float* row = grid + static_cast<std::size_t>(r) * width;
        for (int c = c0; c <= c1; ++c) {
            const float v = row[c];
            ++n;
            const double delta = v - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (v - mean);
            if (v > mx) mx = v;
            if (v < mn) mn = v;
        }
    }
    RegionStats s;
    s.mean = static_cast<float>(mean);
    s.variance = static_cast<float>(m2 / static_cast<double>(n));
    s.max = mx;
    s.min = mn;
    s.range = static_cast<float>(static_cast<double>(mx) - static_cast<double>(mn));
    return s;
}

RegionStats region_stats(const Tensor& t, int ch, int r0, int c0, int r1, int c1) {
    if (!t.shape.is_rank3() && ch != 0) throw BoundsError("rank-1 tensor has a single channel");
    if (ch < 0 || ch >= t.shape.channels()) throw BoundsError("channel out of range");
    const int h = t.shape.height();
    const int w = t.shape.width();
    if (r0 < 0 || c0 < 0 || r1 >= h || c1 >= w || r0 > r1 || c0 > c1) {
        throw BoundsError("region [" + std::to_string(r0) + "," + std::to_string(c0) + "," +
                          std::to_string(r1) + "," + std::to_string(c1) + "] out of bounds for " +
                          t.shape.to_string());
    }
    const std::size_t per_channel = static_cast<std::size_t>(h) * w;
    return region_stats(t.data.data() + per_channel * static_cast<std::size_t>(ch), w, r0, c0, r1, c1);
}

}  // namespace dyve
