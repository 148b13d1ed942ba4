#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "speckstack/error.hpp"

namespace speckstack {

/// Row-major 2-D grid.
template<class T>
class Image {
  public:
    using value_type = T;

    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height)
    {
        if (width < 0 || height < 0)
            throw DomainError("image dimensions must be non-negative");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }
    Image(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        if (width < 0 || height < 0
            || data_.size() != static_cast<std::size_t>(width) * height)
            throw DomainError("image payload does not match dimensions");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) noexcept
    {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    const T& operator()(int x, int y) const noexcept
    {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    /// Replicate-edge access: coordinates are clamped into the image.
    const T& clamped(int x, int y) const noexcept
    {
        return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    std::span<const T> row(int y) const noexcept
    {
        return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    bool same_shape(const auto& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Image&, const Image&) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Continuous non-negative intensities.
using FloatImage = Image<double>;

/// One threshold slice; values are 0 or 1.
using BinaryImage = Image<std::uint8_t>;

/// Per-pixel class index; kUnlabeled marks pixels outside every class.
using LabelMap = Image<std::uint8_t>;
inline constexpr std::uint8_t kUnlabeled = 255;

/// Gray levels in {0..levels}.
class QuantizedImage {
  public:
    QuantizedImage() = default;
    QuantizedImage(int width, int height, int levels, std::uint16_t fill = 0);
    QuantizedImage(Image<std::uint16_t> data, int levels);

    int width() const noexcept { return data_.width(); }
    int height() const noexcept { return data_.height(); }
    std::size_t size() const noexcept { return data_.size(); }
    int levels() const noexcept { return levels_; }

    std::uint16_t operator()(int x, int y) const noexcept { return data_(x, y); }
    std::uint16_t clamped(int x, int y) const noexcept { return data_.clamped(x, y); }

    /// Checked write; throws DomainError when value exceeds levels().
    void set(int x, int y, int value);

    std::span<const std::uint16_t> pixels() const noexcept { return data_.pixels(); }
    const Image<std::uint16_t>& grid() const noexcept { return data_; }

    bool same_shape(const auto& other) const noexcept
    {
        return width() == other.width() && height() == other.height();
    }

    friend bool operator==(const QuantizedImage&, const QuantizedImage&) = default;

  private:
    Image<std::uint16_t> data_;
    int levels_ = 1;
};

/// Gray levels widened to doubles, for metrics that work on real values.
FloatImage to_float(const QuantizedImage& img);

}  // namespace speckstack
