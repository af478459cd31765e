#ifndef GLN_TASKS_HPP
#define GLN_TASKS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gln/base_models.hpp"
#include "gln/data.hpp"
#include "gln/network.hpp"
#include "gln/switching.hpp"

namespace gln {

// ---------------------------------------------------------------------------
// One-vs-all classification
// ---------------------------------------------------------------------------

/// Ensemble of one GLN per class, each trained online against the binary
/// target 1[label == class]. The predicted label is the argmax of the
/// per-class probabilities, ties broken towards the lowest class id.
/// Raw features are optionally centred by a running training mean, then
/// squashed through feature_base to give the base-layer probabilities; the
/// centred features double as the gating side information.
class OneVsAllClassifier {
public:
    OneVsAllClassifier(std::uint32_t classes, const NetworkSpec& per_class_spec,
                       bool mean_subtract, RandomSource& rng);

    struct StepResult {
        std::uint32_t predicted = 0;
        std::vector<double> probs;   // per class, p(label == c)
        std::vector<double> losses;  // per class, top-neuron log loss
    };

    /// Predict, then (when learn) update every class network and the
    /// running feature mean. `t` is the 1-based global example index.
    StepResult step(std::span<const double> raw, std::uint32_t label, bool learn,
                    std::uint64_t t);

    /// Frozen prediction of the class probabilities.
    std::vector<double> predict(std::span<const double> raw) const;
    std::uint32_t predict_label(std::span<const double> raw) const;

    /// Frozen per-class forward traces (for per-layer decision boundaries).
    void traces(std::span<const double> raw, std::vector<ForwardTrace>& out) const;

    std::uint32_t classes() const { return static_cast<std::uint32_t>(nets_.size()); }
    const GatedLinearNetwork& network(std::uint32_t c) const { return nets_[c]; }

    void save(ByteWriter& w) const;
    static OneVsAllClassifier load(ByteReader& r);

private:
    void preprocess(std::span<const double> raw, std::vector<double>& z,
                    std::vector<double>& base) const;

    OneVsAllClassifier() = default;

    std::vector<GatedLinearNetwork> nets_;
    bool mean_subtract_ = false;
    std::vector<double> feature_mean_;
    std::uint64_t mean_count_ = 0;

    // scratch, reused across steps
    mutable std::vector<double> z_buf_, base_buf_;
    std::vector<ForwardTrace> trace_buf_;
};

// ---------------------------------------------------------------------------
// Autoregressive density modelling
// ---------------------------------------------------------------------------

struct DensitySpec {
    std::uint32_t rows = 28;
    std::uint32_t cols = 28;
    std::vector<std::uint32_t> widths = {8, 16, 8, 16};
    double eps = 1e-4;
    double weight_bound = 200.0;
    double beta = 0.0;  // 0 -> e/(1+e)
    InitScheme init = InitScheme::GeometricAverage;
    LearningRateSchedule lr = LearningRateSchedule::capped_inverse_time(25.0, 0.005);
    std::uint32_t skipgram_models = 50;   // base patterns per pixel (presets, then sampled)
    std::uint32_t sampled_skipgram_bits = 2;
    bool use_switching = true;
    bool use_preset_pool = true;          // gate neurons on the built-in preset shapes
};

/// Chain-rule density model over binary images: one GLN per pixel in
/// row-major order, each fed by a bank of per-pixel Zero-Redundancy
/// skip-gram estimators and read out through a switching mixture over
/// the pixel's neurons (or the top neuron when switching is off).
class AutoregressiveDensityModel {
public:
    AutoregressiveDensityModel(const DensitySpec& spec, RandomSource& rng);

    /// Process one image: accumulate -log p(x_i | x_<i) over pixels in
    /// nats; when learn, update base models, networks, and mixtures.
    double step(std::span<const std::uint8_t> image, bool learn);

    /// Per-pixel conditional p(pixel = 1) given a prefix, without mutation.
    double pixel_probability(std::span<const std::uint8_t> image, std::uint32_t pixel) const;

    std::uint32_t pixel_count() const { return spec_.rows * spec_.cols; }
    std::uint64_t images_seen() const { return images_seen_; }
    const DensitySpec& spec() const { return spec_; }

    void save(ByteWriter& w) const;
    static AutoregressiveDensityModel load(ByteReader& r);

private:
    AutoregressiveDensityModel() = default;

    double pixel_predict(std::uint32_t pixel, std::span<const double> z, bool learn, int target);

    DensitySpec spec_;
    std::vector<GatedLinearNetwork> nets_;                  // one per pixel
    std::vector<std::vector<SkipGramBaseModel>> bases_;     // one bank per pixel
    std::vector<SwitchingMixture> mixtures_;                // when switching is on
    std::uint64_t images_seen_ = 0;

    mutable std::vector<double> z_buf_, base_buf_, preds_buf_;
    ForwardTrace trace_buf_;
};

/// One context-free ZR estimator per pixel; the reference baseline the
/// density model must beat.
class IndependentZRBaseline {
public:
    explicit IndependentZRBaseline(std::uint32_t pixels) : counters_(pixels) {}

    double step(std::span<const std::uint8_t> image, bool learn);

    void save(ByteWriter& w) const;
    static IndependentZRBaseline load(ByteReader& r);

private:
    IndependentZRBaseline() = default;
    std::vector<ZRCounter> counters_;
};

// ---------------------------------------------------------------------------
// Synthetic capacity and switching demonstrations
// ---------------------------------------------------------------------------

struct CapacityConfig {
    std::vector<std::uint32_t> widths = {3, 2, 2, 2, 2, 1};
    std::uint64_t rounds = 200000;
    double alpha = 0.5;          // the single constant base predictor
    double eps = 0.01;
    double weight_bound = 5.0;
    LearningRateSchedule lr = LearningRateSchedule::capped_inverse_time(40.0, 0.4);
    bool even_offsets = false;   // first layer: evenly spaced instead of sampled
    bool trivial_top = false;    // top layer: constant context (two-layer variant)
    std::uint32_t grid_points = 601;
};

struct CapacityResult {
    std::vector<double> grid;                                  // z values
    std::vector<std::vector<std::vector<double>>> fit;         // [layer][neuron][grid]
    std::vector<std::vector<double>> cum_loss;                 // [layer][neuron]
    std::vector<std::vector<ContextFunction>> contexts;        // [layer][neuron]
    std::vector<std::pair<std::uint64_t, double>> curve;       // top-neuron block losses
    std::uint64_t rounds = 0;
    GatedLinearNetwork net;
};

/// Train on the Gaussian synthetic task and sample every neuron's learned
/// p(z) on a uniform grid over [-3, 3].
CapacityResult capacity_demo(const CapacityConfig& config, RandomSource& rng);

struct XorConfig {
    std::uint32_t layers = 6;
    std::uint32_t width = 2;
    std::uint64_t rounds = 200000;
    double eps = 0.01;
    double weight_bound = 5.0;
    LearningRateSchedule lr = LearningRateSchedule::capped_inverse_time(40.0, 0.4);
    std::uint32_t grid_points = 41;  // per axis
};

struct XorResult {
    std::vector<double> grid;                           // per-axis coordinates
    std::vector<std::vector<double>> deep_fit;          // [neuron][grid*grid], deepest layer
    std::vector<std::vector<double>> cum_loss;          // [layer][neuron]
    std::vector<std::pair<std::uint64_t, double>> curve;
    std::uint64_t rounds = 0;
    GatedLinearNetwork net;
};

/// The exclusive-or negative control: axis-aligned contexts cannot solve
/// f(z) = 1[z1 z2 >= 0], so deep neurons drift to 1/2.
XorResult xor_demo(const XorConfig& config, RandomSource& rng);

struct SwitchingDemoConfig {
    CapacityConfig capacity;                 // architecture and task setup
    std::vector<std::uint64_t> snapshots;    // rounds at which to record grid fits
    std::uint64_t trajectory_stride = 100;   // record u every this many rounds
};

struct SwitchingDemoResult {
    std::vector<double> grid;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> model_index;  // flat -> (layer, k)
    std::vector<std::uint64_t> trajectory_t;
    std::vector<std::vector<double>> trajectory_u;                    // [record][model]
    std::vector<std::uint64_t> snapshot_t;
    std::vector<std::vector<double>> snapshot_fit;                    // [snapshot][grid], ensemble
    std::vector<double> neuron_cum_loss;                              // [model]
    double ensemble_cum_loss = 0.0;
    std::vector<std::pair<std::uint64_t, double>> curve;              // ensemble block losses
    std::uint64_t rounds = 0;
    GatedLinearNetwork net;
    SwitchingMixture mixture;
};

/// Gaussian task with a switching mixture over every non-bias neuron.
SwitchingDemoResult switching_demo(const SwitchingDemoConfig& config, RandomSource& rng);

}  // namespace gln

#endif  // GLN_TASKS_HPP
