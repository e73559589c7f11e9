#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dyve/errors.hpp"

namespace dyve {

/// Shape of an activation or weight container: rank-1 (flat) or rank-3
/// (channels, height, width).
struct Shape {
    std::vector<int> dims;

    Shape() = default;
    explicit Shape(int n) : dims{n} { validate(); }
    Shape(int c, int h, int w) : dims{c, h, w} { validate(); }

    int rank() const { return static_cast<int>(dims.size()); }
    bool is_rank3() const { return dims.size() == 3; }

    int channels() const { return is_rank3() ? dims[0] : 1; }
    int height() const { return is_rank3() ? dims[1] : 1; }
    int width() const { return is_rank3() ? dims[2] : dims[0]; }

    std::size_t elements() const {
        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }

    void validate() const;

    bool operator==(const Shape& other) const { return dims == other.dims; }
    bool operator!=(const Shape& other) const { return dims != other.dims; }

    std::string to_string() const;
};

/// Read-only 2-D view over one channel of a rank-3 tensor. Zero-copy;
/// indexing matches the row-major channel layout.
class ChannelView {
public:
    ChannelView(const float* base, int height, int width)
        : base_(base), height_(height), width_(width) {}

    float operator()(int r, int c) const { return base_[static_cast<std::size_t>(r) * width_ + c]; }
    const float* data() const { return base_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t elements() const { return static_cast<std::size_t>(height_) * width_; }

private:
    const float* base_;
    int height_;
    int width_;
};

/// Dense 32-bit float tensor, row-major within each channel, channels
/// outermost. Immutable by convention once an inference has produced it.
struct Tensor {
    Shape shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(shape.elements(), 0.0f) {}
    Tensor(Shape s, std::vector<float> values);

    float& at(int c, int r, int col);
    float at(int c, int r, int col) const;

    ChannelView channel(int c) const;

    std::size_t size() const { return data.size(); }
    bool all_finite() const;
};

/// Exact population statistics of a rectangular region of one channel.
struct RegionStats {
    float mean = 0.0f;
    float variance = 0.0f;
    float max = 0.0f;
    float min = 0.0f;
    float range = 0.0f;
};

/// Single-pass (Welford) population statistics over the inclusive region
/// [r0..r1] x [c0..c1] of channel `ch`. Accumulates in double, rounds once.
RegionStats region_stats(const Tensor& t, int ch, int r0, int c0, int r1, int c1);

/// Same statistics over a raw row-major grid (used for knob screening on
/// intermediate buffers that are not yet tensors).
RegionStats region_stats(const float* grid, int width, int r0, int c0, int r1, int c1);

}  // namespace dyve
