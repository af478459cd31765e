#include "gln/base_models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gln/math.hpp"

namespace gln {

namespace {

// KT conditional P_KT(next = x | a zeros, b ones)
double kt_conditional(std::uint64_t zeros, std::uint64_t ones, int x) {
    const double n = static_cast<double>(zeros + ones);
    const double c = x ? static_cast<double>(ones) : static_cast<double>(zeros);
    return (c + 0.5) / (n + 1.0);
}

// Closed-form log P_KT once the marginal is no longer tracked in linear space.
double log_kt_closed_form(std::uint64_t zeros, std::uint64_t ones) {
    const double a = static_cast<double>(zeros);
    const double b = static_cast<double>(ones);
    return std::lgamma(a + 0.5) + std::lgamma(b + 0.5) - 2.0 * std::lgamma(0.5) -
           std::lgamma(a + b + 1.0);
}

}  // namespace

double ZRCounter::predict_one() const {
    // Both point masses die as soon as both symbols have been seen, and the
    // mixture collapses to the plain KT conditional.
    if (zeros_ > 0 && ones_ > 0) return kt_conditional(zeros_, ones_, 1);
    // While a mass is alive, P_KT of a one-sided history decays only
    // polynomially, so the linear-space marginal cannot underflow here.
    double num = 0.5 * kt_ * kt_conditional(zeros_, ones_, 1);
    double den = 0.5 * kt_;
    if (ones_ == 0) den += 0.25;  // all-zeros mass
    if (zeros_ == 0) {            // all-ones mass
        den += 0.25;
        num += 0.25;
    }
    return num / den;
}

double ZRCounter::log_marginal() const {
    if (zeros_ > 0 && ones_ > 0) {
        return std::log(0.5) + log_kt_closed_form(zeros_, ones_);
    }
    double p = 0.5 * kt_;
    if (ones_ == 0) p += 0.25;
    if (zeros_ == 0) p += 0.25;
    return std::log(p);
}

void ZRCounter::update(int x) {
    // kt_ is only consulted while one count is still zero; afterwards it may
    // silently underflow without affecting predictions.
    kt_ *= kt_conditional(zeros_, ones_, x);
    if (x) {
        ++ones_;
    } else {
        ++zeros_;
    }
}

void ZRCounter::save(ByteWriter& w) const {
    w.u64(zeros_);
    w.u64(ones_);
    w.f64(kt_);
}

ZRCounter ZRCounter::load(ByteReader& r) {
    ZRCounter c;
    c.zeros_ = r.u64();
    c.ones_ = r.u64();
    c.kt_ = r.f64();
    return c;
}

SkipGramBaseModel::SkipGramBaseModel(ContextFunction ctx) : ctx_(std::move(ctx)) {
    table_.resize(ctx_.size());
}

double SkipGramBaseModel::predict(std::span<const double> z) const {
    return table_[ctx_(z)].predict_one();
}

void SkipGramBaseModel::update(std::span<const double> z, int x) {
    table_[ctx_(z)].update(x);
}

void SkipGramBaseModel::save(ByteWriter& w) const {
    save_context(w, ctx_);
    w.u32(static_cast<std::uint32_t>(table_.size()));
    for (const auto& counter : table_) counter.save(w);
}

SkipGramBaseModel SkipGramBaseModel::load(ByteReader& r) {
    SkipGramBaseModel model;
    model.ctx_ = load_context(r);
    model.table_.resize(r.u32());
    for (auto& counter : model.table_) counter = ZRCounter::load(r);
    if (model.table_.size() != model.ctx_.size()) {
        throw std::runtime_error("checkpoint: skip-gram table size mismatch");
    }
    return model;
}

std::vector<double> feature_base(std::span<const double> z, double eps) {
    std::vector<double> out;
    feature_base(z, eps, out);
    return out;
}

void feature_base(std::span<const double> z, double eps, std::vector<double>& out) {
    out.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = clip_probability(sigmoid(z[i]), eps);
    }
}

ConstantBase::ConstantBase(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("constant base: alpha must lie in (0,1)");
    }
}

}  // namespace gln
