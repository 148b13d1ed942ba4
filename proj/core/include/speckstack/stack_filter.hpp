#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "speckstack/image.hpp"

namespace speckstack {

/// Window input bit i corresponds to offset i in row-major raster order,
/// top-left to bottom-right. Bit (1 << i) of a pattern holds input i.
using Pattern = std::uint32_t;

/// Sliding window with at most 25 inputs, anchored at column width / 2 and
/// row height / 2. Filtering uses odd sides; even sides (2x2 and the like)
/// serve small training problems.
class WindowShape {
  public:
    static constexpr int kMaxInputs = 25;

    WindowShape() : WindowShape(3, 3) {}
    WindowShape(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int inputs() const noexcept { return width_ * height_; }
    int center() const noexcept { return (height_ / 2) * width_ + width_ / 2; }
    Pattern full_mask() const noexcept { return (Pattern{1} << inputs()) - 1; }

    int dx(int i) const noexcept { return i % width_ - width_ / 2; }
    int dy(int i) const noexcept { return i / width_ - height_ / 2; }

    /// Parses "3x3", "5x3" or a single odd number.
    static WindowShape parse(const std::string& text);
    std::string to_string() const;

    friend bool operator==(const WindowShape&, const WindowShape&) = default;

  private:
    int width_;
    int height_;
};

/// Monotone Boolean function stored as the antichain of its minimal true
/// vectors: f(w) = 1 iff some minimal vector v satisfies v <= w.
class PositiveBooleanFunction {
  public:
    PositiveBooleanFunction() = default;

    /// Reduces `terms` to an antichain (drops duplicates and any term that
    /// dominates another) and sorts it.
    PositiveBooleanFunction(WindowShape window, std::vector<Pattern> terms);

    const WindowShape& window() const noexcept { return window_; }
    const std::vector<Pattern>& minimal_true_vectors() const noexcept { return terms_; }
    std::size_t term_count() const noexcept { return terms_.size(); }

    bool operator()(Pattern p) const noexcept;

    static PositiveBooleanFunction identity(WindowShape window);
    static PositiveBooleanFunction constant(WindowShape window, bool value);
    /// f = 1 iff at least `rank` inputs are 1; the stack filter selects the
    /// rank-th largest sample. rank = (n + 1) / 2 is the median.
    static PositiveBooleanFunction order_statistic(WindowShape window, int rank);
    /// Builds f from its value on every pattern; throws DomainError if the
    /// table is not monotone.
    static PositiveBooleanFunction from_truth_table(WindowShape window,
                                                    std::span<const std::uint8_t> table);

    friend bool operator==(const PositiveBooleanFunction&,
                           const PositiveBooleanFunction&) = default;

  private:
    WindowShape window_;
    std::vector<Pattern> terms_;
};

/// Header "PBF <w> <h> <K>", then one minimal true vector per line as an
/// n-character 0/1 string whose character i is input i.
std::string to_text(const PositiveBooleanFunction& f);
PositiveBooleanFunction parse_pbf(const std::string& text);

std::string pattern_string(Pattern p, int inputs);
Pattern parse_pattern(const std::string& bits);

bool eval_pbf(const PositiveBooleanFunction& f, Pattern pattern);

/// T^m: 1 where img >= m. Requires 1 <= m <= levels.
BinaryImage threshold(const QuantizedImage& img, int m);

/// Slices for m = 1..levels.
std::vector<BinaryImage> threshold_decompose(const QuantizedImage& img);

/// Pixelwise sum of stacked slices; throws DomainError when slice m+1 is not
/// contained in slice m.
QuantizedImage reconstruct(std::span<const BinaryImage> slices);

/// Thresholded window around (x, y) with replicate-edge borders.
Pattern window_pattern(const QuantizedImage& img, const WindowShape& window, int x, int y,
                       int m);

/// Sum over all threshold levels of f on the thresholded window.
QuantizedImage apply_stack_reference(const PositiveBooleanFunction& f,
                                     const QuantizedImage& img);

/// Same output as the reference, computed as max over terms of the minimum
/// of each term's window samples. `workers` > 1 splits rows across threads.
QuantizedImage apply_stack_fast(const PositiveBooleanFunction& f, const QuantizedImage& img,
                                int workers = 1);

/// k-fold composition of apply_stack_fast, k >= 1.
QuantizedImage apply_iterated(const PositiveBooleanFunction& f, const QuantizedImage& img,
                              int k, int workers = 1);

}  // namespace speckstack
