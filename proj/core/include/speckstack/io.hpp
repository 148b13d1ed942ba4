#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "speckstack/image.hpp"

namespace speckstack {

// Binary PGM (P5). maxval <= 255 uses one byte per pixel, otherwise two
// bytes, most significant first.
QuantizedImage decode_pgm(std::string_view bytes);
std::string encode_pgm(const QuantizedImage& img);
std::string encode_pgm(const LabelMap& labels);
/// 8-bit PGM whose values are class indices (255 = unlabeled).
LabelMap decode_labels(std::string_view bytes);

// "F64 <width> <height>\n" followed by row-major little-endian doubles.
FloatImage decode_f64(std::string_view bytes);
std::string encode_f64(const FloatImage& img);

/// 8-bit grayscale PNG; levels are rescaled to 0..255.
std::string encode_png(const QuantizedImage& img);

/// Either a quantized PGM or a continuous F64 image, chosen by magic bytes.
using LoadedImage = std::variant<QuantizedImage, FloatImage>;
LoadedImage decode_image(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace speckstack
