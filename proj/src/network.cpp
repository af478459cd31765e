#include "gln/network.hpp"

#include <cmath>
#include <stdexcept>

namespace gln {

void NetworkSpec::validate() const {
    if (widths.empty()) throw std::invalid_argument("network spec: no layers");
    for (auto k : widths) {
        if (k == 0) throw std::invalid_argument("network spec: zero-width layer");
    }
    const double b = bias();
    if (!(b > 0.0 && b < 1.0) || b == 0.5) {
        throw std::invalid_argument("network spec: beta must lie in (0,1) \\ {1/2}");
    }
    if (!(eps > 0.0 && eps < 0.5)) {
        throw std::invalid_argument("network spec: eps must lie in (0, 1/2)");
    }
    if (!(weight_bound >= 1.0)) {
        throw std::invalid_argument("network spec: weight bound must be >= 1");
    }
    if (contexts.empty()) {
        throw std::invalid_argument("network spec: missing context sources");
    }
    if (contexts.size() != 1 && contexts.size() != widths.size()) {
        throw std::invalid_argument("network spec: need one context source, or one per layer");
    }
    for (const auto& src : contexts) {
        if ((src.kind == ContextSource::Kind::PoolRandom ||
             src.kind == ContextSource::Kind::PoolRoundRobin) &&
            src.pool.empty()) {
            throw std::invalid_argument("network spec: empty context pool");
        }
        if (src.kind == ContextSource::Kind::HalfspaceGaussian && src.bits == 0) {
            throw std::invalid_argument("network spec: half-space source needs bits >= 1");
        }
    }
}

Neuron::Neuron(ContextFunction ctx, std::uint32_t fan_in, double bound, InitScheme init,
               double geometric_bias_value, bool track_visits)
    : ctx_(std::move(ctx)), fan_in_(fan_in), bound_(bound) {
    weights_.assign(static_cast<std::size_t>(ctx_.size()) * fan_in_, 0.0);
    if (init == InitScheme::GeometricAverage) {
        // 1/K over the non-bias fan-in; the bias column gets the same value
        // unless the spec overrides it.
        const double k = fan_in_ > 1 ? static_cast<double>(fan_in_ - 1) : 1.0;
        const double v = 1.0 / k;
        const double bias_v = geometric_bias_value >= 0.0 ? geometric_bias_value : v;
        for (std::uint32_t r = 0; r < ctx_.size(); ++r) {
            auto row = this->row(r);
            row[0] = bias_v;
            for (std::uint32_t j = 1; j < fan_in_; ++j) row[j] = v;
        }
    }
    if (track_visits) visits_.assign(ctx_.size(), 0);
}

void Neuron::save(ByteWriter& w) const {
    save_context(w, ctx_);
    w.u32(fan_in_);
    w.f64(bound_);
    w.u32(static_cast<std::uint32_t>(weights_.size()));
    for (double v : weights_) w.f64(v);
    w.u8(visits_.empty() ? 0 : 1);
    if (!visits_.empty()) {
        for (auto v : visits_) w.u64(v);
    }
}

Neuron Neuron::load(ByteReader& r) {
    Neuron n;
    n.ctx_ = load_context(r);
    n.fan_in_ = r.u32();
    n.bound_ = r.f64();
    n.weights_.resize(r.u32());
    if (n.weights_.size() != static_cast<std::size_t>(n.ctx_.size()) * n.fan_in_) {
        throw std::runtime_error("checkpoint: weight bank size mismatch");
    }
    for (auto& v : n.weights_) v = r.f64();
    if (r.u8()) {
        n.visits_.resize(n.ctx_.size());
        for (auto& v : n.visits_) v = r.u64();
    }
    return n;
}

GatedLinearNetwork::GatedLinearNetwork(NetworkSpec spec, RandomSource& rng)
    : spec_(std::move(spec)) {
    spec_.validate();
    const std::uint32_t layer_count = static_cast<std::uint32_t>(spec_.widths.size());
    neurons_.resize(layer_count);
    std::uint32_t prev_width = spec_.base_width;
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const auto& src = spec_.contexts.size() == 1 ? spec_.contexts[0] : spec_.contexts[i];
        const std::uint32_t width = spec_.widths[i];
        const std::uint32_t fan_in = prev_width + 1;  // bias entry at column 0
        neurons_[i].reserve(width);
        for (std::uint32_t j = 0; j < width; ++j) {
            ContextFunction ctx;
            switch (src.kind) {
                case ContextSource::Kind::Trivial: break;
                case ContextSource::Kind::HalfspaceGaussian: {
                    if (src.bits == 1) {
                        ctx = sample_halfspace(rng, spec_.side_dim, src.sigma_v, src.sigma_b);
                    } else {
                        std::vector<ContextFunction> parts;
                        parts.reserve(src.bits);
                        for (std::uint32_t b = 0; b < src.bits; ++b) {
                            parts.push_back(
                                sample_halfspace(rng, spec_.side_dim, src.sigma_v, src.sigma_b));
                        }
                        ctx = ContextFunction::composed(std::move(parts));
                    }
                    break;
                }
                case ContextSource::Kind::UniformOffset1D:
                    ctx = ContextFunction::half_space({1.0}, rng.uniform(src.lo, src.hi));
                    break;
                case ContextSource::Kind::EvenOffsets1D: {
                    const double step = (src.hi - src.lo) / static_cast<double>(width);
                    ctx = ContextFunction::half_space({1.0}, src.lo + (j + 0.5) * step);
                    break;
                }
                case ContextSource::Kind::PoolRandom:
                    ctx = src.pool[rng.below(src.pool.size())];
                    break;
                case ContextSource::Kind::PoolRoundRobin:
                    ctx = src.pool[j % src.pool.size()];
                    break;
            }
            neurons_[i].emplace_back(std::move(ctx), fan_in, spec_.weight_bound, spec_.init,
                                     spec_.geometric_init_bias, spec_.per_context_time);
        }
        prev_width = width;
    }
}

std::size_t GatedLinearNetwork::neuron_count() const {
    std::size_t n = 0;
    for (const auto& layer : neurons_) n += layer.size();
    return n;
}

void GatedLinearNetwork::forward(std::span<const double> base, std::span<const double> z,
                                 ForwardTrace& trace) const {
    if (base.size() != spec_.base_width) {
        throw std::invalid_argument("forward: base width mismatch");
    }
    const std::size_t layer_count = neurons_.size();
    trace.logit_in.resize(layer_count);
    trace.preact.resize(layer_count);
    trace.clipped.resize(layer_count);
    trace.ctx_id.resize(layer_count);

    const double logit_beta = logit(spec_.bias());
    const double logit_hi = -logit(spec_.eps);  // logit(1 - eps)

    auto& base_in = trace.logit_in[0];
    base_in.resize(base.size() + 1);
    base_in[0] = logit_beta;
    for (std::size_t k = 0; k < base.size(); ++k) {
        base_in[k + 1] = logit(clip_probability(base[k], spec_.eps));
    }

    for (std::size_t i = 0; i < layer_count; ++i) {
        const auto& layer = neurons_[i];
        const auto& in = trace.logit_in[i];
        auto& preact = trace.preact[i];
        auto& clipped = trace.clipped[i];
        auto& ctx_id = trace.ctx_id[i];
        preact.resize(layer.size());
        clipped.resize(layer.size());
        ctx_id.resize(layer.size());

        for (std::size_t j = 0; j < layer.size(); ++j) {
            const Neuron& n = layer[j];
            const std::uint32_t c = n.select(z);
            const auto w = n.row(c);
            if (w.size() != in.size()) {
                throw std::invalid_argument("forward: layer input width mismatch");
            }
            double a = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) a += w[k] * in[k];
            ctx_id[j] = c;
            preact[j] = a;
            clipped[j] = clip_probability(sigmoid(a), spec_.eps);
        }

        if (i + 1 < layer_count) {
            auto& next_in = trace.logit_in[i + 1];
            next_in.resize(layer.size() + 1);
            next_in[0] = logit_beta;
            // clipping in probability space is clamping in logit space
            for (std::size_t j = 0; j < layer.size(); ++j) {
                next_in[j + 1] = std::clamp(preact[j], -logit_hi, logit_hi);
            }
        }
    }
}

std::vector<double> GatedLinearNetwork::update(const ForwardTrace& trace, int x,
                                               std::uint64_t t) {
    if (trace.preact.size() != neurons_.size()) {
        throw std::invalid_argument("update: trace does not match network");
    }
    std::vector<double> losses;
    losses.reserve(neuron_count());
    const double target = static_cast<double>(x);
    const double bound = spec_.weight_bound;

    for (std::size_t i = 0; i < neurons_.size(); ++i) {
        auto& layer = neurons_[i];
        const auto& in = trace.logit_in[i];
        for (std::size_t j = 0; j < layer.size(); ++j) {
            Neuron& n = layer[j];
            const std::uint32_t c = trace.ctx_id[i][j];
            const double a = trace.preact[i][j];
            losses.push_back(geo_loss_from_preact(a, x));

            const std::uint64_t round = n.tracks_visits() ? n.next_visit(c) : t;
            const double eta = spec_.lr(round);
            const double residual = sigmoid(a) - target;
            auto w = n.row(c);
            for (std::size_t k = 0; k < w.size(); ++k) {
                w[k] = std::clamp(w[k] - eta * residual * in[k], -bound, bound);
            }
        }
    }
    return losses;
}

double GatedLinearNetwork::predict(std::span<const double> base,
                                   std::span<const double> z) const {
    if (spec_.widths.back() != 1) {
        throw std::logic_error("predict: network top layer is not scalar");
    }
    ForwardTrace trace;
    forward(base, z, trace);
    return sigmoid(trace.top_preact());
}

void GatedLinearNetwork::save(ByteWriter& w) const {
    w.u32(0x474C4E57u);  // "GLNW"
    w.u32(1);            // format version
    w.u32(spec_.base_width);
    w.u32(static_cast<std::uint32_t>(spec_.widths.size()));
    for (auto k : spec_.widths) w.u32(k);
    w.u32(spec_.side_dim);
    w.f64(spec_.beta);
    w.f64(spec_.eps);
    w.f64(spec_.weight_bound);
    w.u8(static_cast<std::uint8_t>(spec_.init));
    w.f64(spec_.geometric_init_bias);
    w.u8(static_cast<std::uint8_t>(spec_.lr.kind));
    w.f64(spec_.lr.c);
    w.f64(spec_.lr.cap);
    w.u8(spec_.per_context_time ? 1 : 0);
    for (const auto& layer : neurons_) {
        for (const auto& n : layer) n.save(w);
    }
}

GatedLinearNetwork GatedLinearNetwork::load(ByteReader& r) {
    if (r.u32() != 0x474C4E57u) throw std::runtime_error("checkpoint: bad network magic");
    if (r.u32() != 1) throw std::runtime_error("checkpoint: unsupported network version");
    GatedLinearNetwork net;
    auto& spec = net.spec_;
    spec.base_width = r.u32();
    spec.widths.resize(r.u32());
    for (auto& k : spec.widths) k = r.u32();
    spec.side_dim = r.u32();
    spec.beta = r.f64();
    spec.eps = r.f64();
    spec.weight_bound = r.f64();
    spec.init = static_cast<InitScheme>(r.u8());
    spec.geometric_init_bias = r.f64();
    spec.lr.kind = static_cast<LearningRateSchedule::Kind>(r.u8());
    spec.lr.c = r.f64();
    spec.lr.cap = r.f64();
    spec.per_context_time = r.u8() != 0;
    net.neurons_.resize(spec.widths.size());
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
        net.neurons_[i].reserve(spec.widths[i]);
        for (std::uint32_t j = 0; j < spec.widths[i]; ++j) {
            net.neurons_[i].push_back(Neuron::load(r));
        }
    }
    return net;
}

bool GatedLinearNetwork::weights_equal(const GatedLinearNetwork& other) const {
    if (neurons_.size() != other.neurons_.size()) return false;
    for (std::size_t i = 0; i < neurons_.size(); ++i) {
        if (neurons_[i].size() != other.neurons_[i].size()) return false;
        for (std::size_t j = 0; j < neurons_[i].size(); ++j) {
            if (neurons_[i][j].weights() != other.neurons_[i][j].weights()) return false;
        }
    }
    return true;
}

double gated_geo_mix(const Neuron& neuron, std::span<const double> p,
                     std::span<const double> z) {
    const std::uint32_t c = neuron.select(z);
    if (c >= neuron.rows()) throw std::logic_error("gated_geo_mix: context id out of range");
    return geo_mix(neuron.row(c), p);
}

}  // namespace gln
