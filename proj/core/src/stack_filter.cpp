#include "speckstack/stack_filter.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <sstream>
#include <thread>

namespace speckstack {

WindowShape::WindowShape(int width, int height) : width_(width), height_(height)
{
    if (width < 1 || height < 1)
        throw DomainError("window sides must be positive");
    if (width * height > kMaxInputs)
        throw DomainError("window has more than 25 inputs");
}

WindowShape WindowShape::parse(const std::string& text)
{
    int w = 0;
    int h = 0;
    char sep = 0;
    std::istringstream in(text);
    if (!(in >> w))
        throw ParseError("bad window size '" + text + "'");
    if (in >> sep) {
        if ((sep != 'x' && sep != 'X') || !(in >> h))
            throw ParseError("bad window size '" + text + "'");
    } else {
        h = w;
    }
    std::string rest;
    if (in >> rest)
        throw ParseError("bad window size '" + text + "'");
    return WindowShape(w, h);
}

std::string WindowShape::to_string() const
{
    return std::to_string(width_) + "x" + std::to_string(height_);
}

PositiveBooleanFunction::PositiveBooleanFunction(WindowShape window, std::vector<Pattern> terms)
    : window_(window)
{
    const Pattern mask = window.full_mask();
    for (Pattern t : terms) {
        if ((t & ~mask) != 0)
            throw DomainError("term uses inputs outside the window");
    }
    // Fewer bits first: a term can only dominate terms with at least as many bits.
    std::sort(terms.begin(), terms.end(), [](Pattern a, Pattern b) {
        const int pa = std::popcount(a);
        const int pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (Pattern t : terms) {
        const bool dominated = std::any_of(terms_.begin(), terms_.end(),
                                           [t](Pattern kept) { return (kept & ~t) == 0; });
        if (!dominated)
            terms_.push_back(t);
    }
    std::sort(terms_.begin(), terms_.end());
}

bool PositiveBooleanFunction::operator()(Pattern p) const noexcept
{
    for (Pattern t : terms_) {
        if ((t & ~p) == 0)
            return true;
    }
    return false;
}

PositiveBooleanFunction PositiveBooleanFunction::identity(WindowShape window)
{
    return PositiveBooleanFunction(window, {Pattern{1} << window.center()});
}

PositiveBooleanFunction PositiveBooleanFunction::constant(WindowShape window, bool value)
{
    if (value)
        return PositiveBooleanFunction(window, {Pattern{0}});
    return PositiveBooleanFunction(window, {});
}

PositiveBooleanFunction PositiveBooleanFunction::order_statistic(WindowShape window, int rank)
{
    const int n = window.inputs();
    if (rank < 1 || rank > n)
        throw DomainError("order statistic rank out of range");
    std::vector<Pattern> terms;
    // Gosper's hack: every n-bit pattern with exactly `rank` bits set.
    Pattern p = (Pattern{1} << rank) - 1;
    const Pattern limit = Pattern{1} << n;
    while (p < limit) {
        terms.push_back(p);
        const Pattern c = p & (~p + 1);
        const Pattern r = p + c;
        p = (((r ^ p) >> 2) / c) | r;
    }
    return PositiveBooleanFunction(window, std::move(terms));
}

PositiveBooleanFunction PositiveBooleanFunction::from_truth_table(
    WindowShape window, std::span<const std::uint8_t> table)
{
    const int n = window.inputs();
    const std::size_t count = std::size_t{1} << n;
    if (table.size() != count)
        throw DomainError("truth table size does not match window");
    std::vector<Pattern> terms;
    for (std::size_t p = 0; p < count; ++p) {
        bool minimal = table[p] != 0;
        for (int i = 0; i < n; ++i) {
            if (!(p & (std::size_t{1} << i)))
                continue;
            const std::size_t below = p & ~(std::size_t{1} << i);
            if (table[below] && !table[p])
                throw DomainError("truth table is not monotone");
            if (table[below])
                minimal = false;
        }
        if (minimal)
            terms.push_back(static_cast<Pattern>(p));
    }
    return PositiveBooleanFunction(window, std::move(terms));
}

std::string pattern_string(Pattern p, int inputs)
{
    std::string s(static_cast<std::size_t>(inputs), '0');
    for (int i = 0; i < inputs; ++i) {
        if (p & (Pattern{1} << i))
            s[i] = '1';
    }
    return s;
}

Pattern parse_pattern(const std::string& bits)
{
    if (bits.empty() || bits.size() > static_cast<std::size_t>(WindowShape::kMaxInputs))
        throw ParseError("bad pattern length in '" + bits + "'");
    Pattern p = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1')
            p |= Pattern{1} << i;
        else if (bits[i] != '0')
            throw ParseError("pattern must be a 0/1 string: '" + bits + "'");
    }
    return p;
}

std::string to_text(const PositiveBooleanFunction& f)
{
    std::ostringstream out;
    const auto& w = f.window();
    out << "PBF " << w.width() << ' ' << w.height() << ' ' << f.term_count() << '\n';
    for (Pattern t : f.minimal_true_vectors())
        out << pattern_string(t, w.inputs()) << '\n';
    return out.str();
}

PositiveBooleanFunction parse_pbf(const std::string& text)
{
    std::istringstream in(text);
    std::string magic;
    int w = 0;
    int h = 0;
    long k = -1;
    if (!(in >> magic >> w >> h >> k) || magic != "PBF" || k < 0)
        throw ParseError("missing or malformed 'PBF <w> <h> <K>' header");
    WindowShape window(w, h);
    std::vector<Pattern> terms;
    terms.reserve(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) {
        std::string bits;
        if (!(in >> bits))
            throw ParseError("PBF file ends after " + std::to_string(i) + " of "
                             + std::to_string(k) + " terms");
        if (bits.size() != static_cast<std::size_t>(window.inputs()))
            throw ParseError("term '" + bits + "' does not match window " + window.to_string());
        terms.push_back(parse_pattern(bits));
    }
    std::string extra;
    if (in >> extra)
        throw ParseError("trailing data after PBF terms");
    return PositiveBooleanFunction(window, std::move(terms));
}

bool eval_pbf(const PositiveBooleanFunction& f, Pattern pattern)
{
    return f(pattern);
}

BinaryImage threshold(const QuantizedImage& img, int m)
{
    if (m < 1 || m > img.levels())
        throw DomainError("threshold level " + std::to_string(m) + " outside [1, "
                          + std::to_string(img.levels()) + "]");
    BinaryImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] >= m ? 1 : 0;
    return out;
}

std::vector<BinaryImage> threshold_decompose(const QuantizedImage& img)
{
    std::vector<BinaryImage> slices;
    slices.reserve(static_cast<std::size_t>(img.levels()));
    for (int m = 1; m <= img.levels(); ++m)
        slices.push_back(threshold(img, m));
    return slices;
}

QuantizedImage reconstruct(std::span<const BinaryImage> slices)
{
    if (slices.empty())
        throw DomainError("reconstruct needs at least one slice");
    const int w = slices.front().width();
    const int h = slices.front().height();
    Image<std::uint16_t> sum(w, h);
    for (std::size_t m = 0; m < slices.size(); ++m) {
        const auto& s = slices[m];
        if (s.width() != w || s.height() != h)
            throw DomainError("slices differ in size");
        auto bits = s.pixels();
        auto acc = sum.pixels();
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] > 1)
                throw DomainError("slice values must be 0 or 1");
            if (m > 0 && bits[i] > slices[m - 1].pixels()[i])
                throw DomainError("stacking violated between slices " + std::to_string(m)
                                  + " and " + std::to_string(m + 1));
            acc[i] = static_cast<std::uint16_t>(acc[i] + bits[i]);
        }
    }
    return QuantizedImage(std::move(sum), static_cast<int>(slices.size()));
}

Pattern window_pattern(const QuantizedImage& img, const WindowShape& window, int x, int y, int m)
{
    Pattern p = 0;
    for (int i = 0; i < window.inputs(); ++i) {
        if (img.clamped(x + window.dx(i), y + window.dy(i)) >= m)
            p |= Pattern{1} << i;
    }
    return p;
}

QuantizedImage apply_stack_reference(const PositiveBooleanFunction& f, const QuantizedImage& img)
{
    Image<std::uint16_t> out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            int sum = 0;
            for (int m = 1; m <= img.levels(); ++m)
                sum += eval_pbf(f, window_pattern(img, f.window(), x, y, m)) ? 1 : 0;
            out(x, y) = static_cast<std::uint16_t>(sum);
        }
    }
    return QuantizedImage(std::move(out), img.levels());
}

namespace {

// Terms as flat offset lists: term t covers inputs[first[t] .. first[t + 1]).
struct TermTable {
    std::vector<int> first;
    std::vector<int> inputs;
};

TermTable make_term_table(const PositiveBooleanFunction& f)
{
    TermTable table;
    table.first.push_back(0);
    for (Pattern t : f.minimal_true_vectors()) {
        for (int i = 0; i < f.window().inputs(); ++i) {
            if (t & (Pattern{1} << i))
                table.inputs.push_back(i);
        }
        table.first.push_back(static_cast<int>(table.inputs.size()));
    }
    return table;
}

void apply_rows(const PositiveBooleanFunction& f, const TermTable& table,
                const QuantizedImage& img, Image<std::uint16_t>& out, int y0, int y1)
{
    const auto& window = f.window();
    const int n = window.inputs();
    const std::size_t terms = f.term_count();
    const int levels = img.levels();
    std::vector<int> dx(n), dy(n);
    for (int i = 0; i < n; ++i) {
        dx[i] = window.dx(i);
        dy[i] = window.dy(i);
    }
    std::vector<std::uint16_t> samples(n);
    for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < img.width(); ++x) {
            std::uint16_t window_max = 0;
            for (int i = 0; i < n; ++i) {
                samples[i] = img.clamped(x + dx[i], y + dy[i]);
                window_max = std::max(window_max, samples[i]);
            }
            int best = 0;
            for (std::size_t t = 0; t < terms; ++t) {
                int lo = levels;
                for (int j = table.first[t]; j < table.first[t + 1]; ++j)
                    lo = std::min<int>(lo, samples[table.inputs[j]]);
                if (lo > best) {
                    best = lo;
                    if (best >= window_max)
                        break;
                }
            }
            out(x, y) = static_cast<std::uint16_t>(best);
        }
    }
}

}  // namespace

QuantizedImage apply_stack_fast(const PositiveBooleanFunction& f, const QuantizedImage& img,
                                int workers)
{
    const auto table = make_term_table(f);
    Image<std::uint16_t> out(img.width(), img.height());
    // An empty term (constant-1 f) yields levels, which may exceed window_max;
    // the early exit above only triggers when best >= window_max, so handle it here.
    const bool constant_one = f.term_count() == 1 && f.minimal_true_vectors()[0] == 0;
    if (constant_one) {
        for (auto& v : out.pixels())
            v = static_cast<std::uint16_t>(img.levels());
        return QuantizedImage(std::move(out), img.levels());
    }
    workers = std::clamp(workers, 1, std::max(1, img.height()));
    if (workers == 1) {
        apply_rows(f, table, img, out, 0, img.height());
    } else {
        std::vector<std::jthread> pool;
        const int rows = img.height();
        for (int w = 0; w < workers; ++w) {
            const int y0 = rows * w / workers;
            const int y1 = rows * (w + 1) / workers;
            pool.emplace_back([&, y0, y1] { apply_rows(f, table, img, out, y0, y1); });
        }
    }
    return QuantizedImage(std::move(out), img.levels());
}

QuantizedImage apply_iterated(const PositiveBooleanFunction& f, const QuantizedImage& img, int k,
                              int workers)
{
    if (k < 1)
        throw DomainError("iteration count must be >= 1");
    QuantizedImage current = apply_stack_fast(f, img, workers);
    for (int i = 1; i < k; ++i)
        current = apply_stack_fast(f, current, workers);
    return current;
}

}  // namespace speckstack
