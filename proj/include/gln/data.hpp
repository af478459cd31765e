#ifndef GLN_DATA_HPP
#define GLN_DATA_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gln/random.hpp"

namespace gln {

// ---------------------------------------------------------------------------
// IDX tensors (the MNIST container format): big-endian magic, big-endian
// 32-bit dimension sizes, then the unsigned byte payload.
// ---------------------------------------------------------------------------

struct IdxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IdxBadMagic : IdxError {
    using IdxError::IdxError;
};
struct IdxTruncated : IdxError {
    using IdxError::IdxError;
};
struct IdxDimensionOverflow : IdxError {
    using IdxError::IdxError;
};

struct IdxTensor {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;

    static constexpr std::uint32_t kImagesMagic = 0x00000803;
    static constexpr std::uint32_t kLabelsMagic = 0x00000801;
};

IdxTensor load_idx(const std::string& path);
void save_idx(const IdxTensor& tensor, const std::string& path);

/// Threshold at `threshold` (pixel >= threshold maps to 1), preserving
/// row-major order.
std::vector<std::uint8_t> binarize(std::span<const std::uint8_t> image,
                                   std::uint8_t threshold);

// ---------------------------------------------------------------------------
// Moment deskewing. Computes the intensity center of mass and second-order
// central moments, then resamples through the shear that zeroes the mixed
// moment (shear factor mu11 / mu02, applied along rows). Bilinear sampling,
// output clamped to the input range; zero-mass images pass through.
// ---------------------------------------------------------------------------

std::vector<double> deskew(std::span<const double> image, std::uint32_t rows,
                           std::uint32_t cols);

struct ImageMoments {
    double mass = 0.0;
    double row_center = 0.0;
    double col_center = 0.0;
    double mu02 = 0.0;  // row variance
    double mu20 = 0.0;  // column variance
    double mu11 = 0.0;  // mixed moment
};

ImageMoments image_moments(std::span<const double> image, std::uint32_t rows,
                           std::uint32_t cols);

// ---------------------------------------------------------------------------
// Synthetic tasks
// ---------------------------------------------------------------------------

struct LabeledExample {
    std::vector<double> features;
    std::uint32_t label = 0;
};

/// Three interleaved spiral arms. Arm c places points at parameters
/// s = (i + 1/2)/n: radius s·r_max, angle 2πc/classes + s·theta_span plus
/// N(0, noise) angular jitter. Examples are shuffled with the same rng.
struct SpiralParams {
    std::uint32_t per_class = 1000;
    std::uint32_t classes = 3;
    double r_max = 3.0;
    double theta_span = 4.71238898038469;  // 3π/2, a three-quarter turn
    double noise = 0.1;                    // radians
};

std::vector<LabeledExample> spiral_dataset(const SpiralParams& params, RandomSource& rng);

/// Label a point by its nearest ideal (noise-free) arm; reference oracle
/// for decision-boundary grids and recoverability checks.
std::uint32_t spiral_nearest_arc(const SpiralParams& params, double x, double y);

/// The capacity-experiment target f(z) = exp(-z^2 / 2) on z ∈ [-3, 3].
double gaussian_truth(double z);

/// Draw (z, x): z ~ U[-3,3], x ~ Bernoulli(f(z)).
std::pair<double, int> gaussian_task_sample(RandomSource& rng);

}  // namespace gln

#endif  // GLN_DATA_HPP
