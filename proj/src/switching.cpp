#include "gln/switching.hpp"

#include <stdexcept>

namespace gln {

SwitchingMixture::SwitchingMixture(std::size_t model_count) {
    if (model_count == 0) throw std::invalid_argument("switching: empty model set");
    u_.assign(model_count, 1.0 / static_cast<double>(model_count));
}

double SwitchingMixture::predict(std::span<const double> preds) const {
    if (preds.size() != u_.size()) throw std::invalid_argument("switching: size mismatch");
    double p = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i) p += u_[i] * preds[i];
    return p;
}

void SwitchingMixture::update(std::span<const double> preds, int x) {
    if (preds.size() != u_.size()) throw std::invalid_argument("switching: size mismatch");
    const std::size_t m = u_.size();
    if (m == 1) {  // a mixture over one model is that model
        ++t_;
        return;
    }
    double tau = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double rho = x ? preds[i] : 1.0 - preds[i];
        tau += u_[i] * rho;
    }
    if (!(tau > 0.0)) throw std::domain_error("switching: mixture assigned zero probability");

    const double t = static_cast<double>(t_);
    const double denom = (t + 1.0) * (static_cast<double>(m) - 1.0);
    const double floor = 1.0 / denom;
    const double carry = (t * static_cast<double>(m) - t - 1.0) / denom;

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double rho = x ? preds[i] : 1.0 - preds[i];
        u_[i] = floor + carry * (u_[i] * rho / tau);
        total += u_[i];
    }
    for (auto& ui : u_) ui /= total;
    ++t_;
}

void SwitchingMixture::save(ByteWriter& w) const {
    w.u32(static_cast<std::uint32_t>(u_.size()));
    for (double ui : u_) w.f64(ui);
    w.u64(t_);
}

SwitchingMixture SwitchingMixture::load(ByteReader& r) {
    SwitchingMixture mix;
    mix.u_.resize(r.u32());
    for (auto& ui : mix.u_) ui = r.f64();
    mix.t_ = r.u64();
    return mix;
}

double switch_prior_mass(std::span<const std::uint32_t> sequence, std::size_t model_count) {
    if (model_count == 0) throw std::invalid_argument("switch_prior_mass: empty model set");
    if (sequence.empty()) return 1.0;
    double mass = 1.0 / static_cast<double>(model_count);
    for (std::size_t n = 2; n <= sequence.size(); ++n) {
        const double dn = static_cast<double>(n);
        if (sequence[n - 1] == sequence[n - 2]) {
            mass *= (dn - 1.0) / dn;
        } else {
            mass *= 1.0 / (dn * (static_cast<double>(model_count) - 1.0));
        }
    }
    return mass;
}

}  // namespace gln
