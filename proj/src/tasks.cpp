#include "gln/tasks.hpp"

#include <cmath>
#include <stdexcept>

namespace gln {

// ---------------------------------------------------------------------------
// OneVsAllClassifier
// ---------------------------------------------------------------------------

OneVsAllClassifier::OneVsAllClassifier(std::uint32_t classes, const NetworkSpec& per_class_spec,
                                       bool mean_subtract, RandomSource& rng)
    : mean_subtract_(mean_subtract) {
    if (classes < 2) throw std::invalid_argument("one-vs-all: need at least two classes");
    nets_.reserve(classes);
    for (std::uint32_t c = 0; c < classes; ++c) {
        RandomSource class_rng = rng.derive(c);
        nets_.emplace_back(per_class_spec, class_rng);
    }
    feature_mean_.assign(per_class_spec.base_width, 0.0);
    trace_buf_.resize(classes);
}

void OneVsAllClassifier::preprocess(std::span<const double> raw, std::vector<double>& z,
                                    std::vector<double>& base) const {
    z.assign(raw.begin(), raw.end());
    if (mean_subtract_ && mean_count_ > 0) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] -= feature_mean_[i];
    }
    feature_base(z, nets_[0].spec().eps, base);
}

OneVsAllClassifier::StepResult OneVsAllClassifier::step(std::span<const double> raw,
                                                        std::uint32_t label, bool learn,
                                                        std::uint64_t t) {
    if (label >= nets_.size()) throw std::invalid_argument("one-vs-all: label out of range");
    preprocess(raw, z_buf_, base_buf_);

    StepResult result;
    result.probs.resize(nets_.size());
    result.losses.resize(nets_.size());
    for (std::size_t c = 0; c < nets_.size(); ++c) {
        nets_[c].forward(base_buf_, z_buf_, trace_buf_[c]);
        result.probs[c] = sigmoid(trace_buf_[c].top_preact());
    }
    result.predicted = 0;
    for (std::size_t c = 1; c < nets_.size(); ++c) {
        if (result.probs[c] > result.probs[result.predicted]) {
            result.predicted = static_cast<std::uint32_t>(c);
        }
    }
    for (std::size_t c = 0; c < nets_.size(); ++c) {
        const int target = label == c ? 1 : 0;
        result.losses[c] = geo_loss_from_preact(trace_buf_[c].top_preact(), target);
        if (learn) nets_[c].update(trace_buf_[c], target, t);
    }
    if (learn && mean_subtract_) {
        ++mean_count_;
        for (std::size_t i = 0; i < feature_mean_.size(); ++i) {
            feature_mean_[i] += (raw[i] - feature_mean_[i]) / static_cast<double>(mean_count_);
        }
    }
    return result;
}

std::vector<double> OneVsAllClassifier::predict(std::span<const double> raw) const {
    std::vector<double> probs(nets_.size());
    preprocess(raw, z_buf_, base_buf_);
    ForwardTrace trace;
    for (std::size_t c = 0; c < nets_.size(); ++c) {
        nets_[c].forward(base_buf_, z_buf_, trace);
        probs[c] = sigmoid(trace.top_preact());
    }
    return probs;
}

std::uint32_t OneVsAllClassifier::predict_label(std::span<const double> raw) const {
    const auto probs = predict(raw);
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[best]) best = c;
    }
    return best;
}

void OneVsAllClassifier::traces(std::span<const double> raw,
                                std::vector<ForwardTrace>& out) const {
    out.resize(nets_.size());
    preprocess(raw, z_buf_, base_buf_);
    for (std::size_t c = 0; c < nets_.size(); ++c) nets_[c].forward(base_buf_, z_buf_, out[c]);
}

void OneVsAllClassifier::save(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(nets_.size()));
    for (const auto& net : nets_) net.save(w);
    w.u8(mean_subtract_ ? 1 : 0);
    w.u64(mean_count_);
    w.u32(static_cast<std::uint32_t>(feature_mean_.size()));
    for (double m : feature_mean_) w.f64(m);
}

OneVsAllClassifier OneVsAllClassifier::load(ByteReader& r) {
    OneVsAllClassifier clf;
    const std::uint32_t classes = r.u32();
    clf.nets_.reserve(classes);
    for (std::uint32_t c = 0; c < classes; ++c) clf.nets_.push_back(GatedLinearNetwork::load(r));
    clf.mean_subtract_ = r.u8() != 0;
    clf.mean_count_ = r.u64();
    clf.feature_mean_.resize(r.u32());
    for (auto& m : clf.feature_mean_) m = r.f64();
    clf.trace_buf_.resize(classes);
    return clf;
}

// ---------------------------------------------------------------------------
// AutoregressiveDensityModel
// ---------------------------------------------------------------------------

namespace {

// Per-pixel bank of base patterns: the unconditional estimator, the built-in
// skip-gram presets, then rng-sampled shapes until `count` is reached.
std::vector<ContextPreset> density_base_patterns(std::uint32_t count,
                                                 std::uint32_t sampled_bits,
                                                 RandomSource& rng) {
    std::vector<ContextPreset> patterns;
    ContextPreset marginal;
    marginal.kind = ContextPreset::Kind::SkipGram;
    marginal.name = "marginal";
    patterns.push_back(marginal);  // no bits: plain ZR on the pixel
    for (const auto& preset : builtin_context_presets()) {
        if (patterns.size() >= count) break;
        if (preset.kind == ContextPreset::Kind::SkipGram) patterns.push_back(preset);
    }
    while (patterns.size() < count) {
        auto preset = sample_skipgram_preset(rng, sampled_bits, 5, 5, 5);
        preset.name = "sampled_" + std::to_string(patterns.size());
        patterns.push_back(std::move(preset));
    }
    patterns.resize(count);
    return patterns;
}

}  // namespace

AutoregressiveDensityModel::AutoregressiveDensityModel(const DensitySpec& spec,
                                                       RandomSource& rng)
    : spec_(spec) {
    const std::uint32_t pixels = spec_.rows * spec_.cols;
    if (pixels == 0) throw std::invalid_argument("density model: empty image");
    if (spec_.skipgram_models == 0) {
        throw std::invalid_argument("density model: need at least one base model");
    }

    RandomSource pattern_rng = rng.derive(1);
    const auto patterns =
        density_base_patterns(spec_.skipgram_models, spec_.sampled_skipgram_bits, pattern_rng);

    nets_.reserve(pixels);
    bases_.reserve(pixels);
    if (spec_.use_switching) mixtures_.reserve(pixels);

    RandomSource net_rng = rng.derive(2);
    for (std::uint32_t pixel = 0; pixel < pixels; ++pixel) {
        auto& bank = bases_.emplace_back();
        bank.reserve(patterns.size());
        for (const auto& pattern : patterns) {
            bank.emplace_back(instantiate_preset(pattern, pixel, spec_.rows, spec_.cols));
        }

        NetworkSpec net_spec;
        net_spec.base_width = static_cast<std::uint32_t>(bank.size());
        net_spec.widths = spec_.widths;
        net_spec.side_dim = pixels;
        net_spec.beta = spec_.beta;
        net_spec.eps = spec_.eps;
        net_spec.weight_bound = spec_.weight_bound;
        net_spec.init = spec_.init;
        net_spec.lr = spec_.lr;
        if (spec_.use_preset_pool) {
            std::vector<ContextFunction> pool;
            pool.reserve(builtin_context_presets().size());
            for (const auto& preset : builtin_context_presets()) {
                pool.push_back(instantiate_preset(preset, pixel, spec_.rows, spec_.cols));
            }
            net_spec.contexts = {ContextSource::pool_random(std::move(pool))};
        } else {
            net_spec.contexts = {ContextSource::trivial()};
        }
        RandomSource pixel_rng = net_rng.derive(pixel);
        nets_.emplace_back(net_spec, pixel_rng);

        if (spec_.use_switching) {
            mixtures_.emplace_back(nets_.back().neuron_count());
        }
    }
}

double AutoregressiveDensityModel::pixel_predict(std::uint32_t pixel,
                                                 std::span<const double> z, bool learn,
                                                 int target) {
    auto& bank = bases_[pixel];
    base_buf_.resize(bank.size());
    for (std::size_t m = 0; m < bank.size(); ++m) base_buf_[m] = bank[m].predict(z);

    nets_[pixel].forward(base_buf_, z, trace_buf_);

    double p;
    if (spec_.use_switching) {
        preds_buf_.clear();
        for (const auto& layer : trace_buf_.clipped) {
            preds_buf_.insert(preds_buf_.end(), layer.begin(), layer.end());
        }
        p = mixtures_[pixel].predict(preds_buf_);
        if (learn) {
            mixtures_[pixel].update(preds_buf_, target);
        }
    } else {
        p = sigmoid(trace_buf_.top_preact());
    }
    if (learn) {
        nets_[pixel].update(trace_buf_, target, images_seen_ + 1);
        for (auto& model : bank) model.update(z, target);
    }
    return p;
}

double AutoregressiveDensityModel::step(std::span<const std::uint8_t> image, bool learn) {
    const std::uint32_t pixels = pixel_count();
    if (image.size() != pixels) throw std::invalid_argument("density model: image size mismatch");
    z_buf_.resize(pixels);
    for (std::uint32_t i = 0; i < pixels; ++i) z_buf_[i] = image[i] ? 1.0 : 0.0;

    double nats = 0.0;
    for (std::uint32_t i = 0; i < pixels; ++i) {
        const int x = image[i] ? 1 : 0;
        const double p = pixel_predict(i, z_buf_, learn, x);
        nats -= x ? std::log(p) : std::log1p(-p);
    }
    if (learn) ++images_seen_;
    return nats;
}

double AutoregressiveDensityModel::pixel_probability(std::span<const std::uint8_t> image,
                                                     std::uint32_t pixel) const {
    auto* self = const_cast<AutoregressiveDensityModel*>(this);
    const std::uint32_t pixels = pixel_count();
    if (image.size() != pixels || pixel >= pixels) {
        throw std::invalid_argument("density model: bad pixel query");
    }
    self->z_buf_.resize(pixels);
    for (std::uint32_t i = 0; i < pixels; ++i) self->z_buf_[i] = image[i] ? 1.0 : 0.0;
    return self->pixel_predict(pixel, self->z_buf_, false, 0);
}

void AutoregressiveDensityModel::save(ByteWriter& w) const {
    w.u32(0x474C4E44u);  // "GLND"
    w.u32(spec_.rows);
    w.u32(spec_.cols);
    w.u32(static_cast<std::uint32_t>(spec_.widths.size()));
    for (auto k : spec_.widths) w.u32(k);
    w.f64(spec_.eps);
    w.f64(spec_.weight_bound);
    w.f64(spec_.beta);
    w.u8(static_cast<std::uint8_t>(spec_.init));
    w.u8(static_cast<std::uint8_t>(spec_.lr.kind));
    w.f64(spec_.lr.c);
    w.f64(spec_.lr.cap);
    w.u32(spec_.skipgram_models);
    w.u32(spec_.sampled_skipgram_bits);
    w.u8(spec_.use_switching ? 1 : 0);
    w.u8(spec_.use_preset_pool ? 1 : 0);
    w.u64(images_seen_);
    for (const auto& net : nets_) net.save(w);
    for (const auto& bank : bases_) {
        w.u32(static_cast<std::uint32_t>(bank.size()));
        for (const auto& model : bank) model.save(w);
    }
    for (const auto& mix : mixtures_) mix.save(w);
}

AutoregressiveDensityModel AutoregressiveDensityModel::load(ByteReader& r) {
    if (r.u32() != 0x474C4E44u) throw std::runtime_error("checkpoint: bad density magic");
    AutoregressiveDensityModel model;
    auto& spec = model.spec_;
    spec.rows = r.u32();
    spec.cols = r.u32();
    spec.widths.resize(r.u32());
    for (auto& k : spec.widths) k = r.u32();
    spec.eps = r.f64();
    spec.weight_bound = r.f64();
    spec.beta = r.f64();
    spec.init = static_cast<InitScheme>(r.u8());
    spec.lr.kind = static_cast<LearningRateSchedule::Kind>(r.u8());
    spec.lr.c = r.f64();
    spec.lr.cap = r.f64();
    spec.skipgram_models = r.u32();
    spec.sampled_skipgram_bits = r.u32();
    spec.use_switching = r.u8() != 0;
    spec.use_preset_pool = r.u8() != 0;
    model.images_seen_ = r.u64();
    const std::uint32_t pixels = spec.rows * spec.cols;
    model.nets_.reserve(pixels);
    for (std::uint32_t i = 0; i < pixels; ++i) {
        model.nets_.push_back(GatedLinearNetwork::load(r));
    }
    model.bases_.resize(pixels);
    for (auto& bank : model.bases_) {
        const std::uint32_t count = r.u32();
        bank.reserve(count);
        for (std::uint32_t m = 0; m < count; ++m) bank.push_back(SkipGramBaseModel::load(r));
    }
    if (spec.use_switching) {
        model.mixtures_.reserve(pixels);
        for (std::uint32_t i = 0; i < pixels; ++i) {
            model.mixtures_.push_back(SwitchingMixture::load(r));
        }
    }
    return model;
}

double IndependentZRBaseline::step(std::span<const std::uint8_t> image, bool learn) {
    if (image.size() != counters_.size()) {
        throw std::invalid_argument("zr baseline: image size mismatch");
    }
    double nats = 0.0;
    for (std::size_t i = 0; i < counters_.size(); ++i) {
        const double p = counters_[i].predict_one();
        nats -= image[i] ? std::log(p) : std::log1p(-p);
        if (learn) counters_[i].update(image[i] ? 1 : 0);
    }
    return nats;
}

void IndependentZRBaseline::save(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(counters_.size()));
    for (const auto& c : counters_) c.save(w);
}

IndependentZRBaseline IndependentZRBaseline::load(ByteReader& r) {
    IndependentZRBaseline baseline;
    baseline.counters_.resize(r.u32());
    for (auto& c : baseline.counters_) c = ZRCounter::load(r);
    return baseline;
}

// ---------------------------------------------------------------------------
// Synthetic demonstrations
// ---------------------------------------------------------------------------

namespace {

NetworkSpec capacity_network_spec(const CapacityConfig& config) {
    NetworkSpec spec;
    spec.base_width = 1;
    spec.widths = config.widths;
    spec.side_dim = 1;
    spec.eps = config.eps;
    spec.weight_bound = config.weight_bound;
    spec.init = InitScheme::Zero;
    spec.lr = config.lr;
    spec.per_context_time = true;
    spec.contexts.assign(config.widths.size(), ContextSource::uniform_offset_1d(-3.0, 3.0));
    if (config.even_offsets) spec.contexts[0] = ContextSource::even_offsets_1d(-3.0, 3.0);
    if (config.trivial_top) spec.contexts.back() = ContextSource::trivial();
    return spec;
}

}  // namespace

CapacityResult capacity_demo(const CapacityConfig& config, RandomSource& rng) {
    CapacityResult result;
    RandomSource net_rng = rng.derive(0);
    RandomSource data_rng = rng.derive(1);
    GatedLinearNetwork net(capacity_network_spec(config), net_rng);

    const double alpha = config.alpha;
    const double base[1] = {alpha};
    ForwardTrace trace;
    result.cum_loss.resize(net.layers());
    for (std::uint32_t i = 0; i < net.layers(); ++i) {
        result.cum_loss[i].assign(net.width(i), 0.0);
    }

    const std::uint64_t block = std::max<std::uint64_t>(1, config.rounds / 100);
    double block_loss = 0.0;
    for (std::uint64_t t = 1; t <= config.rounds; ++t) {
        const auto [z, x] = gaussian_task_sample(data_rng);
        const double zvec[1] = {z};
        net.forward(base, zvec, trace);
        for (std::uint32_t i = 0; i < net.layers(); ++i) {
            for (std::uint32_t j = 0; j < net.width(i); ++j) {
                const double p = trace.clipped[i][j];
                result.cum_loss[i][j] -= x ? std::log(p) : std::log1p(-p);
            }
        }
        const double top = trace.clipped.back()[0];
        block_loss -= x ? std::log(top) : std::log1p(-top);
        if (t % block == 0) {
            result.curve.push_back({t, block_loss / static_cast<double>(block)});
            block_loss = 0.0;
        }
        net.update(trace, x, t);
    }

    result.grid.resize(config.grid_points);
    result.fit.resize(net.layers());
    result.contexts.resize(net.layers());
    for (std::uint32_t i = 0; i < net.layers(); ++i) {
        result.fit[i].assign(net.width(i), std::vector<double>(config.grid_points));
        for (std::uint32_t j = 0; j < net.width(i); ++j) {
            result.contexts[i].push_back(net.neuron(i, j).context());
        }
    }
    for (std::uint32_t g = 0; g < config.grid_points; ++g) {
        const double z = -3.0 + 6.0 * g / static_cast<double>(config.grid_points - 1);
        result.grid[g] = z;
        const double zvec[1] = {z};
        net.forward(base, zvec, trace);
        for (std::uint32_t i = 0; i < net.layers(); ++i) {
            for (std::uint32_t j = 0; j < net.width(i); ++j) {
                result.fit[i][j][g] = sigmoid(trace.preact[i][j]);
            }
        }
    }
    result.rounds = config.rounds;
    result.net = std::move(net);
    return result;
}

XorResult xor_demo(const XorConfig& config, RandomSource& rng) {
    NetworkSpec spec;
    spec.base_width = 1;
    spec.widths.assign(config.layers, config.width);
    spec.side_dim = 2;
    spec.eps = config.eps;
    spec.weight_bound = config.weight_bound;
    spec.init = InitScheme::Zero;
    spec.lr = config.lr;
    spec.per_context_time = true;
    std::vector<ContextFunction> pool = {ContextFunction::half_space({1.0, 0.0}, 0.0),
                                         ContextFunction::half_space({0.0, 1.0}, 0.0)};
    spec.contexts.assign(config.layers, ContextSource::pool_round_robin(pool));

    RandomSource net_rng = rng.derive(0);
    RandomSource data_rng = rng.derive(1);
    GatedLinearNetwork net(spec, net_rng);

    const double base[1] = {0.5};
    ForwardTrace trace;
    XorResult result;
    result.cum_loss.resize(net.layers());
    for (std::uint32_t i = 0; i < net.layers(); ++i) {
        result.cum_loss[i].assign(net.width(i), 0.0);
    }

    const std::uint64_t block = std::max<std::uint64_t>(1, config.rounds / 100);
    double block_loss = 0.0;
    for (std::uint64_t t = 1; t <= config.rounds; ++t) {
        const double z[2] = {data_rng.uniform(-1.0, 1.0), data_rng.uniform(-1.0, 1.0)};
        const int x = z[0] * z[1] >= 0.0 ? 1 : 0;
        net.forward(base, z, trace);
        for (std::uint32_t i = 0; i < net.layers(); ++i) {
            for (std::uint32_t j = 0; j < net.width(i); ++j) {
                const double p = trace.clipped[i][j];
                result.cum_loss[i][j] -= x ? std::log(p) : std::log1p(-p);
            }
        }
        const double top = trace.clipped.back()[0];
        block_loss -= x ? std::log(top) : std::log1p(-top);
        if (t % block == 0) {
            result.curve.push_back({t, block_loss / static_cast<double>(block)});
            block_loss = 0.0;
        }
        net.update(trace, x, t);
    }

    result.grid.resize(config.grid_points);
    for (std::uint32_t g = 0; g < config.grid_points; ++g) {
        result.grid[g] = -1.0 + 2.0 * g / static_cast<double>(config.grid_points - 1);
    }
    const std::uint32_t deep = net.layers() - 1;
    result.deep_fit.assign(net.width(deep),
                           std::vector<double>(config.grid_points * config.grid_points));
    for (std::uint32_t gy = 0; gy < config.grid_points; ++gy) {
        for (std::uint32_t gx = 0; gx < config.grid_points; ++gx) {
            const double z[2] = {result.grid[gx], result.grid[gy]};
            net.forward(base, z, trace);
            for (std::uint32_t j = 0; j < net.width(deep); ++j) {
                result.deep_fit[j][gy * config.grid_points + gx] = sigmoid(trace.preact[deep][j]);
            }
        }
    }
    result.rounds = config.rounds;
    result.net = std::move(net);
    return result;
}

SwitchingDemoResult switching_demo(const SwitchingDemoConfig& config, RandomSource& rng) {
    RandomSource net_rng = rng.derive(0);
    RandomSource data_rng = rng.derive(1);
    GatedLinearNetwork net(capacity_network_spec(config.capacity), net_rng);

    SwitchingDemoResult result;
    for (std::uint32_t i = 0; i < net.layers(); ++i) {
        for (std::uint32_t j = 0; j < net.width(i); ++j) result.model_index.push_back({i, j});
    }
    SwitchingMixture mixture(result.model_index.size());
    result.neuron_cum_loss.assign(result.model_index.size(), 0.0);

    const double base[1] = {config.capacity.alpha};
    ForwardTrace trace;
    std::vector<double> preds(result.model_index.size());

    const std::uint32_t grid_points = config.capacity.grid_points;
    result.grid.resize(grid_points);
    for (std::uint32_t g = 0; g < grid_points; ++g) {
        result.grid[g] = -3.0 + 6.0 * g / static_cast<double>(grid_points - 1);
    }

    const std::uint64_t block = std::max<std::uint64_t>(1, config.capacity.rounds / 100);
    double block_loss = 0.0;

    auto record_snapshot = [&](std::uint64_t t) {
        result.snapshot_t.push_back(t);
        std::vector<double> fit(grid_points);
        for (std::uint32_t g = 0; g < grid_points; ++g) {
            const double zvec[1] = {result.grid[g]};
            net.forward(base, zvec, trace);
            std::size_t m = 0;
            for (std::uint32_t i = 0; i < net.layers(); ++i) {
                for (std::uint32_t j = 0; j < net.width(i); ++j) {
                    preds[m++] = trace.clipped[i][j];
                }
            }
            fit[g] = mixture.predict(preds);
        }
        result.snapshot_fit.push_back(std::move(fit));
    };

    for (std::uint64_t t = 1; t <= config.capacity.rounds; ++t) {
        const auto [z, x] = gaussian_task_sample(data_rng);
        const double zvec[1] = {z};
        net.forward(base, zvec, trace);
        std::size_t m = 0;
        for (std::uint32_t i = 0; i < net.layers(); ++i) {
            for (std::uint32_t j = 0; j < net.width(i); ++j) {
                preds[m++] = trace.clipped[i][j];
            }
        }
        const double tau = mixture.predict(preds);
        const double loss = x ? -std::log(tau) : -std::log1p(-tau);
        result.ensemble_cum_loss += loss;
        block_loss += loss;
        if (t % block == 0) {
            result.curve.push_back({t, block_loss / static_cast<double>(block)});
            block_loss = 0.0;
        }
        for (std::size_t k = 0; k < preds.size(); ++k) {
            result.neuron_cum_loss[k] -= x ? std::log(preds[k]) : std::log1p(-preds[k]);
        }
        mixture.update(preds, x);
        net.update(trace, x, t);

        if (t % config.trajectory_stride == 0 || t == 1) {
            result.trajectory_t.push_back(t);
            result.trajectory_u.push_back(mixture.weights());
        }
        for (std::uint64_t snap : config.snapshots) {
            if (snap == t) record_snapshot(t);
        }
    }
    result.rounds = config.capacity.rounds;
    result.net = std::move(net);
    result.mixture = std::move(mixture);
    return result;
}

}  // namespace gln
