#include "gln/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace gln {

namespace {

std::uint32_t read_be32(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>((v >> 24) & 0xFF), static_cast<unsigned char>((v >> 16) & 0xFF),
        static_cast<unsigned char>((v >> 8) & 0xFF), static_cast<unsigned char>(v & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

IdxTensor load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError("cannot open IDX file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 4) throw IdxTruncated(path + ": missing magic");

    IdxTensor tensor;
    tensor.magic = read_be32(bytes.data());
    // magic layout: 0x0000 | type byte | rank byte; only unsigned bytes here
    const std::uint32_t type = (tensor.magic >> 8) & 0xFF;
    const std::uint32_t rank = tensor.magic & 0xFF;
    if ((tensor.magic >> 16) != 0 || type != 0x08 || rank == 0) {
        throw IdxBadMagic(path + ": bad magic");
    }
    if (bytes.size() < 4 + 4 * static_cast<std::size_t>(rank)) {
        throw IdxTruncated(path + ": truncated dimension header");
    }

    std::uint64_t total = 1;
    tensor.dims.resize(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
        tensor.dims[i] = read_be32(bytes.data() + 4 + 4 * i);
        total *= tensor.dims[i];
        if (total > (1ull << 33)) throw IdxDimensionOverflow(path + ": dimension overflow");
    }
    const std::size_t header = 4 + 4 * static_cast<std::size_t>(rank);
    if (bytes.size() - header < total) throw IdxTruncated(path + ": truncated payload");
    if (bytes.size() - header > total) throw IdxError(path + ": trailing bytes after payload");
    tensor.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return tensor;
}

void save_idx(const IdxTensor& tensor, const std::string& path) {
    std::uint64_t total = 1;
    for (auto d : tensor.dims) total *= d;
    if (total != tensor.payload.size()) {
        throw IdxError("save_idx: payload does not match dimensions");
    }
    if ((tensor.magic & 0xFF) != tensor.dims.size()) {
        throw IdxError("save_idx: magic rank does not match dimensions");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IdxError("cannot open for writing: " + path);
    write_be32(out, tensor.magic);
    for (auto d : tensor.dims) write_be32(out, d);
    out.write(reinterpret_cast<const char*>(tensor.payload.data()),
              static_cast<std::streamsize>(tensor.payload.size()));
    if (!out) throw IdxError("write failed: " + path);
}

std::vector<std::uint8_t> binarize(std::span<const std::uint8_t> image,
                                   std::uint8_t threshold) {
    std::vector<std::uint8_t> out(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) out[i] = image[i] >= threshold ? 1 : 0;
    return out;
}

ImageMoments image_moments(std::span<const double> image, std::uint32_t rows,
                           std::uint32_t cols) {
    ImageMoments m;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            const double v = image[static_cast<std::size_t>(r) * cols + c];
            m.mass += v;
            m.row_center += v * r;
            m.col_center += v * c;
        }
    }
    if (m.mass <= 0.0) return m;
    m.row_center /= m.mass;
    m.col_center /= m.mass;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            const double v = image[static_cast<std::size_t>(r) * cols + c];
            const double dr = r - m.row_center;
            const double dc = c - m.col_center;
            m.mu02 += v * dr * dr;
            m.mu20 += v * dc * dc;
            m.mu11 += v * dr * dc;
        }
    }
    m.mu02 /= m.mass;
    m.mu20 /= m.mass;
    m.mu11 /= m.mass;
    return m;
}

std::vector<double> deskew(std::span<const double> image, std::uint32_t rows,
                           std::uint32_t cols) {
    if (image.size() != static_cast<std::size_t>(rows) * cols) {
        throw std::invalid_argument("deskew: image size mismatch");
    }
    const ImageMoments m = image_moments(image, rows, cols);
    if (m.mass <= 0.0 || m.mu02 <= 0.0) {
        return std::vector<double>(image.begin(), image.end());
    }
    const double shear = m.mu11 / m.mu02;

    double lo = image[0], hi = image[0];
    for (double v : image) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    std::vector<double> out(image.size(), 0.0);
    for (std::uint32_t r = 0; r < rows; ++r) {
        // sample the source column sheared proportionally to the row offset
        const double src_shift = shear * (static_cast<double>(r) - m.row_center);
        for (std::uint32_t c = 0; c < cols; ++c) {
            const double src_c = static_cast<double>(c) + src_shift;
            const double fc = std::floor(src_c);
            const int c0 = static_cast<int>(fc);
            const double frac = src_c - fc;
            double v = 0.0;
            if (c0 >= 0 && c0 < static_cast<int>(cols)) {
                v += (1.0 - frac) * image[static_cast<std::size_t>(r) * cols + c0];
            }
            if (c0 + 1 >= 0 && c0 + 1 < static_cast<int>(cols)) {
                v += frac * image[static_cast<std::size_t>(r) * cols + c0 + 1];
            }
            out[static_cast<std::size_t>(r) * cols + c] = std::clamp(v, lo, hi);
        }
    }
    return out;
}

std::vector<LabeledExample> spiral_dataset(const SpiralParams& params, RandomSource& rng) {
    if (params.per_class == 0 || params.classes == 0) {
        throw std::invalid_argument("spiral_dataset: empty dataset");
    }
    std::vector<LabeledExample> examples;
    examples.reserve(static_cast<std::size_t>(params.per_class) * params.classes);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::uint32_t c = 0; c < params.classes; ++c) {
        for (std::uint32_t i = 0; i < params.per_class; ++i) {
            const double s = (static_cast<double>(i) + 0.5) / params.per_class;
            const double radius = s * params.r_max;
            const double theta = two_pi * c / params.classes + s * params.theta_span +
                                 (params.noise > 0.0 ? rng.normal(0.0, params.noise) : 0.0);
            examples.push_back(
                {{radius * std::cos(theta), radius * std::sin(theta)}, c});
        }
    }
    // Fisher-Yates with the same source so the stream order is seeded too
    for (std::size_t i = examples.size(); i > 1; --i) {
        std::swap(examples[i - 1], examples[rng.below(i)]);
    }
    return examples;
}

std::uint32_t spiral_nearest_arc(const SpiralParams& params, double x, double y) {
    const double two_pi = 2.0 * std::numbers::pi;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_class = 0;
    constexpr int kSamples = 512;
    for (std::uint32_t c = 0; c < params.classes; ++c) {
        for (int i = 0; i < kSamples; ++i) {
            const double s = (i + 0.5) / kSamples;
            const double radius = s * params.r_max;
            const double theta = two_pi * c / params.classes + s * params.theta_span;
            const double dx = x - radius * std::cos(theta);
            const double dy = y - radius * std::sin(theta);
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                best_class = c;
            }
        }
    }
    return best_class;
}

double gaussian_truth(double z) { return std::exp(-0.5 * z * z); }

std::pair<double, int> gaussian_task_sample(RandomSource& rng) {
    const double z = rng.uniform(-3.0, 3.0);
    const int x = rng.bernoulli(gaussian_truth(z)) ? 1 : 0;
    return {z, x};
}

}  // namespace gln
