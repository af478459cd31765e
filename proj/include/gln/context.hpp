#ifndef GLN_CONTEXT_HPP
#define GLN_CONTEXT_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gln/random.hpp"

namespace gln {

/// Trivial context: a single cell, every z maps to id 0.
struct ConstantContext {};

/// 1[z · v >= offset]; two cells.
struct HalfSpaceContext {
    std::vector<double> normal;
    double offset = 0.0;
};

/// Selected coordinates of z thresholded at 1/2, read as a big-endian
/// binary number in declaration order. A single index gives {0,1}; an
/// empty index list degenerates to the constant context.
struct SkipGramContext {
    std::vector<std::uint32_t> indices;
};

/// Mixed-radix composition of child context functions:
/// c(z) = Σ_i c_i(z) · Π_{j>i} |C_j|.
class ContextFunction;
struct ComposedContext {
    std::vector<ContextFunction> parts;
};

/// Image context: one bit per region, each bit the max of its (binary)
/// pixels; bits concatenated big-endian in region order. Regions hold
/// absolute pixel indices that must precede the pixel being predicted.
struct MaxPoolContext {
    std::vector<std::vector<std::uint32_t>> regions;
};

/// Image context: probes ordered pixel locations and returns the 1-based
/// rank of the first active probe, or 0 when none fires. L probes give
/// a context space of size L+1.
struct DistanceContext {
    std::vector<std::uint32_t> probes;
};

/// Immutable, cheaply copyable context function: maps side information z
/// to a context id in {0, ..., size()-1}. Shareable across threads.
class ContextFunction {
public:
    using Node = std::variant<ConstantContext, HalfSpaceContext, SkipGramContext,
                              ComposedContext, MaxPoolContext, DistanceContext>;

    ContextFunction();  // constant context
    explicit ContextFunction(Node node);

    /// Number of context cells k.
    std::uint32_t size() const { return size_; }

    /// Evaluate on side information z.
    std::uint32_t operator()(std::span<const double> z) const;

    const Node& node() const { return *node_; }

    static ContextFunction constant();
    static ContextFunction half_space(std::vector<double> normal, double offset);
    static ContextFunction skip_gram(std::vector<std::uint32_t> indices);
    static ContextFunction composed(std::vector<ContextFunction> parts);
    static ContextFunction max_pool(std::vector<std::vector<std::uint32_t>> regions);
    static ContextFunction distance(std::vector<std::uint32_t> probes);

private:
    std::shared_ptr<const Node> node_;
    std::uint32_t size_ = 1;
};

/// Draw a half-space context with normal ~ N(0, sigma_v^2)^dim and
/// offset ~ N(0, sigma_b^2). Deterministic given the rng state.
ContextFunction sample_halfspace(RandomSource& rng, std::uint32_t dim, double sigma_v,
                                 double sigma_b);

class ByteWriter;
class ByteReader;
void save_context(ByteWriter& w, const ContextFunction& ctx);
ContextFunction load_context(ByteReader& r);

// ---------------------------------------------------------------------------
// Preset shapes for image contexts.
//
// A preset describes a context shape by pixel offsets (drow, dcol) relative
// to the pixel being predicted. Offsets must be causal under row-major
// ordering: drow < 0, or drow == 0 and dcol < 0. Presets are instantiated
// per pixel; offsets that fall outside the image become dead probes (never
// active), which keeps a single shape usable at every pixel position.
// ---------------------------------------------------------------------------

struct PixelOffset {
    int drow = 0;
    int dcol = 0;
    bool operator==(const PixelOffset&) const = default;
};

struct ContextPreset {
    enum class Kind : std::uint8_t { SkipGram = 0, MaxPool = 1, Distance = 2 };

    Kind kind = Kind::SkipGram;
    std::string name;
    // skipgram: one group per bit (each a single offset);
    // maxpool:  one group per region;
    // distance: a single group holding the probe order.
    std::vector<std::vector<PixelOffset>> groups;
};

/// Parse the plain-text preset format (see data/context_presets.txt).
/// Throws std::runtime_error with a line-tagged message on bad input.
std::vector<ContextPreset> parse_context_presets(std::istream& in);

/// Presets shipped with the library (same content as the data file).
const std::vector<ContextPreset>& builtin_context_presets();

/// Raw text of the built-in preset table.
const char* builtin_context_presets_text();

/// Bind a preset shape to a concrete pixel of a rows×cols image.
/// Throws std::invalid_argument if the shape holds a non-causal offset.
ContextFunction instantiate_preset(const ContextPreset& preset, std::uint32_t pixel,
                                   std::uint32_t rows, std::uint32_t cols);

/// Random skip-gram shape: `bits` distinct causal offsets drawn from the
/// window drow ∈ [-max_up, 0], dcol ∈ [-max_left, max_right].
ContextPreset sample_skipgram_preset(RandomSource& rng, std::uint32_t bits, int max_up,
                                     int max_left, int max_right);

}  // namespace gln

#endif  // GLN_CONTEXT_HPP
