#ifndef GLN_NETWORK_HPP
#define GLN_NETWORK_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gln/context.hpp"
#include "gln/math.hpp"
#include "gln/mixer.hpp"
#include "gln/random.hpp"
#include "gln/schedule.hpp"
#include "gln/serialize.hpp"

namespace gln {

enum class InitScheme : std::uint8_t { Zero = 0, GeometricAverage = 1 };

/// Recipe for drawing each neuron's context function at network build time.
struct ContextSource {
    enum class Kind : std::uint8_t {
        Trivial = 0,            // constant context, k = 1
        HalfspaceGaussian = 1,  // `bits` composed half-spaces, v ~ N(0, σ_v²)^d, offset ~ N(0, σ_b²)
        UniformOffset1D = 2,    // 1-d half-space z >= offset, offset ~ U(lo, hi)
        EvenOffsets1D = 3,      // 1-d half-spaces with offsets evenly spaced over (lo, hi)
        PoolRandom = 4,         // draw uniformly from `pool`
        PoolRoundRobin = 5,     // pool[j % pool.size()] for neuron j
    };

    Kind kind = Kind::Trivial;
    std::uint32_t bits = 1;
    double sigma_v = 1.0;
    double sigma_b = 0.0;
    double lo = -3.0;
    double hi = 3.0;
    std::vector<ContextFunction> pool;

    static ContextSource trivial() { return {}; }
    static ContextSource halfspace_gaussian(std::uint32_t bits, double sigma_v, double sigma_b) {
        ContextSource s;
        s.kind = Kind::HalfspaceGaussian;
        s.bits = bits;
        s.sigma_v = sigma_v;
        s.sigma_b = sigma_b;
        return s;
    }
    static ContextSource uniform_offset_1d(double lo, double hi) {
        ContextSource s;
        s.kind = Kind::UniformOffset1D;
        s.lo = lo;
        s.hi = hi;
        return s;
    }
    static ContextSource even_offsets_1d(double lo, double hi) {
        ContextSource s;
        s.kind = Kind::EvenOffsets1D;
        s.lo = lo;
        s.hi = hi;
        return s;
    }
    static ContextSource pool_random(std::vector<ContextFunction> pool) {
        ContextSource s;
        s.kind = Kind::PoolRandom;
        s.pool = std::move(pool);
        return s;
    }
    static ContextSource pool_round_robin(std::vector<ContextFunction> pool) {
        ContextSource s;
        s.kind = Kind::PoolRoundRobin;
        s.pool = std::move(pool);
        return s;
    }
};

struct NetworkSpec {
    std::uint32_t base_width = 1;         // K_0
    std::vector<std::uint32_t> widths;    // K_1 ... K_L (non-bias neurons per layer)
    std::uint32_t side_dim = 1;           // dimension of z for sampled half-spaces
    double beta = 0.0;                    // bias constant; 0 means e/(1+e)
    double eps = 0.01;                    // probability clip
    double weight_bound = 200.0;          // hypercube half-width b
    InitScheme init = InitScheme::Zero;
    double geometric_init_bias = -1.0;    // bias-column value under geometric init; <0: same as rest
    LearningRateSchedule lr = LearningRateSchedule::constant(0.01);
    bool per_context_time = false;        // count schedule rounds per (neuron, context)
    std::vector<ContextSource> contexts;  // one per layer (or one shared entry)

    void validate() const;
    double bias() const { return beta > 0.0 ? beta : default_beta(); }
};

/// A gated geometric mixing neuron: a context function plus one weight row
/// per context cell. Column 0 of every row weighs the constant bias input.
class Neuron {
public:
    Neuron() = default;
    Neuron(ContextFunction ctx, std::uint32_t fan_in, double bound, InitScheme init,
           double geometric_bias_value, bool track_visits);

    std::uint32_t rows() const { return ctx_.size(); }
    std::uint32_t fan_in() const { return fan_in_; }
    double bound() const { return bound_; }
    const ContextFunction& context() const { return ctx_; }

    std::span<const double> row(std::uint32_t r) const {
        return {weights_.data() + static_cast<std::size_t>(r) * fan_in_, fan_in_};
    }
    std::span<double> row(std::uint32_t r) {
        return {weights_.data() + static_cast<std::size_t>(r) * fan_in_, fan_in_};
    }

    std::uint32_t select(std::span<const double> z) const { return ctx_(z); }

    /// Bump and fetch the per-row round counter (per-context schedules).
    std::uint64_t next_visit(std::uint32_t r) { return ++visits_[r]; }
    bool tracks_visits() const { return !visits_.empty(); }

    const std::vector<double>& weights() const { return weights_; }

    void save(ByteWriter& w) const;
    static Neuron load(ByteReader& r);

private:
    ContextFunction ctx_;
    std::vector<double> weights_;  // rows() x fan_in_, row-major
    std::vector<std::uint64_t> visits_;
    std::uint32_t fan_in_ = 0;
    double bound_ = 1.0;
};

/// Everything forward() computes, kept so update() can replay the same
/// inputs. Index [i] is layer i+1 of the paper (the first mixing layer).
struct ForwardTrace {
    // logit of each layer's clipped input vector, bias entry first;
    // logit_in[0] covers the base layer, logit_in[i] the output of layer i.
    std::vector<std::vector<double>> logit_in;
    std::vector<std::vector<double>> preact;        // w · logit(input) per neuron
    std::vector<std::vector<double>> clipped;       // clip(σ(preact)) per neuron
    std::vector<std::vector<std::uint32_t>> ctx_id; // selected weight row per neuron

    double top_preact() const { return preact.back().at(0); }
};

/// Feed-forward gated linear network with local online gradient updates.
class GatedLinearNetwork {
public:
    GatedLinearNetwork() = default;

    /// Build from a spec; all context draws come from `rng` in a fixed
    /// order (layer-major, then neuron), so equal seeds give equal nets.
    GatedLinearNetwork(NetworkSpec spec, RandomSource& rng);

    const NetworkSpec& spec() const { return spec_; }
    std::uint32_t layers() const { return static_cast<std::uint32_t>(neurons_.size()); }
    std::uint32_t width(std::uint32_t layer) const {
        return static_cast<std::uint32_t>(neurons_[layer].size());
    }
    const Neuron& neuron(std::uint32_t layer, std::uint32_t k) const {
        return neurons_[layer][k];
    }
    std::size_t neuron_count() const;

    /// Evaluate the network. `base` holds K_0 probabilities (clipped on
    /// entry as a precaution), `z` is the side information for gating.
    void forward(std::span<const double> base, std::span<const double> z,
                 ForwardTrace& trace) const;

    /// One local OGD step per non-bias neuron against target x, replaying
    /// `trace`. `t` is the 1-based global round index used by the learning
    /// rate schedule (ignored per neuron when per-context time is on).
    /// Returns each neuron's pre-update log loss, layer-major.
    std::vector<double> update(const ForwardTrace& trace, int x, std::uint64_t t);

    /// Probability of x = 1 from the single top neuron. No mutation.
    double predict(std::span<const double> base, std::span<const double> z) const;

    void save(ByteWriter& w) const;
    static GatedLinearNetwork load(ByteReader& r);

    /// Bitwise equality of all weights (diagnostics/tests).
    bool weights_equal(const GatedLinearNetwork& other) const;

private:
    NetworkSpec spec_;
    std::vector<std::vector<Neuron>> neurons_;
};

/// Gated mixture for a standalone neuron: picks row c(z) and geometrically
/// mixes p (which must already include whatever bias entry the row expects).
double gated_geo_mix(const Neuron& neuron, std::span<const double> p,
                     std::span<const double> z);

}  // namespace gln

#endif  // GLN_NETWORK_HPP
