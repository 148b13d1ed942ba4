#include "speckstack/io.hpp"

#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace speckstack {

namespace {

// Reads a whitespace-delimited unsigned integer from a netpbm-style header,
// skipping '#' comments.
class HeaderReader {
  public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    long number(const char* what)
    {
        skip_space();
        if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
            throw ParseError(std::string("expected ") + what + " in image header");
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > 1'000'000'000)
                throw ParseError(std::string(what) + " too large in image header");
        }
        return value;
    }

    /// Consumes the single whitespace byte that ends the header.
    std::size_t payload_offset()
    {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            throw ParseError("image header must end with one whitespace byte");
        return pos_ + 1;
    }

    void expect(std::string_view magic)
    {
        if (bytes_.substr(0, magic.size()) != magic)
            throw ParseError("bad magic, expected '" + std::string(magic) + "'");
        pos_ = magic.size();
    }

  private:
    void skip_space()
    {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

void check_dimensions(long width, long height)
{
    if (width < 1 || height < 1 || width > 65536 || height > 65536)
        throw ParseError("image dimensions out of range");
}

std::uint32_t crc(std::string_view type, std::string_view data)
{
    uLong c = crc32(0L, Z_NULL, 0);
    c = crc32(c, reinterpret_cast<const Bytef*>(type.data()), static_cast<uInt>(type.size()));
    c = crc32(c, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
    return static_cast<std::uint32_t>(c);
}

void put_be32(std::string& out, std::uint32_t v)
{
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

void put_chunk(std::string& out, std::string_view type, std::string_view data)
{
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    out.append(type);
    out.append(data);
    put_be32(out, crc(type, data));
}

}  // namespace

QuantizedImage decode_pgm(std::string_view bytes)
{
    HeaderReader header(bytes);
    header.expect("P5");
    const long width = header.number("width");
    const long height = header.number("height");
    const long maxval = header.number("maxval");
    check_dimensions(width, height);
    if (maxval < 1 || maxval > 65535)
        throw ParseError("PGM maxval must be in [1, 65535]");
    const std::size_t offset = header.payload_offset();
    const std::size_t bytes_per = maxval < 256 ? 1 : 2;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - offset < count * bytes_per)
        throw ParseError("PGM payload truncated: expected " + std::to_string(count * bytes_per)
                         + " bytes, got " + std::to_string(bytes.size() - offset));
    std::vector<std::uint16_t> data(count);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = bytes_per == 1 ? p[i] : static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
        if (data[i] > maxval)
            throw ParseError("PGM pixel exceeds maxval");
    }
    return QuantizedImage(Image<std::uint16_t>(static_cast<int>(width), static_cast<int>(height),
                                               std::move(data)),
                          static_cast<int>(maxval));
}

std::string encode_pgm(const QuantizedImage& img)
{
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height())
                      + "\n" + std::to_string(img.levels()) + "\n";
    const bool wide = img.levels() > 255;
    out.reserve(out.size() + img.size() * (wide ? 2 : 1));
    for (auto v : img.pixels()) {
        if (wide)
            out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xFF));
    }
    return out;
}

std::string encode_pgm(const LabelMap& labels)
{
    std::string out = "P5\n" + std::to_string(labels.width()) + " "
                      + std::to_string(labels.height()) + "\n255\n";
    out.append(reinterpret_cast<const char*>(labels.pixels().data()), labels.size());
    return out;
}

LabelMap decode_labels(std::string_view bytes)
{
    const QuantizedImage img = decode_pgm(bytes);
    if (img.levels() > 255)
        throw ParseError("label map must be an 8-bit PGM");
    LabelMap labels(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            labels(x, y) = static_cast<std::uint8_t>(img(x, y));
    }
    return labels;
}

FloatImage decode_f64(std::string_view bytes)
{
    HeaderReader header(bytes);
    header.expect("F64");
    const long width = header.number("width");
    const long height = header.number("height");
    check_dimensions(width, height);
    const std::size_t offset = header.payload_offset();
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - offset != count * sizeof(double))
        throw ParseError("F64 payload size mismatch: expected " + std::to_string(count * 8)
                         + " bytes, got " + std::to_string(bytes.size() - offset));
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t raw = 0;
        for (int b = 7; b >= 0; --b)
            raw = (raw << 8) | static_cast<unsigned char>(bytes[offset + 8 * i + b]);
        data[i] = std::bit_cast<double>(raw);
        if (!std::isfinite(data[i]) || data[i] < 0.0)
            throw ParseError("F64 pixels must be finite and non-negative");
    }
    return FloatImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::string encode_f64(const FloatImage& img)
{
    std::string out =
        "F64 " + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n";
    out.reserve(out.size() + img.size() * 8);
    for (double v : img.pixels()) {
        auto raw = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            out.push_back(static_cast<char>(raw & 0xFF));
            raw >>= 8;
        }
    }
    return out;
}

std::string encode_png(const QuantizedImage& img)
{
    std::string raw;
    raw.reserve(img.size() + static_cast<std::size_t>(img.height()));
    for (int y = 0; y < img.height(); ++y) {
        raw.push_back(0);  // filter type: none
        for (int x = 0; x < img.width(); ++x) {
            const auto v = img(x, y);
            raw.push_back(static_cast<char>((v * 255 + img.levels() / 2) / img.levels()));
        }
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::string packed(packed_size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION)
        != Z_OK)
        throw std::runtime_error("zlib compression failed");
    packed.resize(packed_size);

    std::string ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(img.width()));
    put_be32(ihdr, static_cast<std::uint32_t>(img.height()));
    ihdr += std::string{'\x08', '\x00', '\x00', '\x00', '\x00'};  // 8-bit gray

    std::string out = "\x89PNG\r\n\x1a\n";
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", "");
    return out;
}

LoadedImage decode_image(std::string_view bytes)
{
    if (bytes.substr(0, 2) == "P5")
        return decode_pgm(bytes);
    if (bytes.substr(0, 3) == "F64")
        return decode_f64(bytes);
    throw ParseError("unrecognized image format (expected P5 PGM or F64)");
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace speckstack
