#ifndef GLN_MIXER_HPP
#define GLN_MIXER_HPP

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gln/math.hpp"

namespace gln {

namespace detail {
inline void check_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}
}  // namespace detail

/// Geometric mixture of input probabilities in its sigmoid-of-logits form:
/// σ(w · logit(p)). Inputs are expected pre-clipped into (0,1).
inline double geo_mix(std::span<const double> w, std::span<const double> p) {
    detail::check_same_size(w.size(), p.size(), "geo_mix");
    double a = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) a += w[i] * logit(p[i]);
    return sigmoid(a);
}

/// Same mixture when the caller already holds logit(p).
inline double geo_mix_preact(std::span<const double> w, std::span<const double> logit_p) {
    detail::check_same_size(w.size(), logit_p.size(), "geo_mix_preact");
    double a = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) a += w[i] * logit_p[i];
    return a;
}

/// Log loss of the mixture against target bit x, computed from the
/// pre-activation so that saturated outputs still give a finite loss.
inline double geo_loss_from_preact(double preact, int x) {
    return x ? softplus(-preact) : softplus(preact);
}

/// -log GEO_w(x; p).
inline double geo_loss(std::span<const double> w, std::span<const double> p, int x) {
    detail::check_same_size(w.size(), p.size(), "geo_loss");
    double a = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) a += w[i] * logit(p[i]);
    return geo_loss_from_preact(a, x);
}

/// Exact gradient of the log loss in w: (GEO_w(1; p) - x) · logit(p).
inline std::vector<double> geo_gradient(std::span<const double> w,
                                        std::span<const double> p, int x) {
    detail::check_same_size(w.size(), p.size(), "geo_gradient");
    std::vector<double> lp(w.size());
    double a = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        lp[i] = logit(p[i]);
        a += w[i] * lp[i];
    }
    const double residual = sigmoid(a) - static_cast<double>(x);
    for (auto& g : lp) g *= residual;
    return lp;
}

/// One step of projected online gradient descent: w ← Π(w - η g), where the
/// projection onto the hypercube [-bound, bound]^m is a componentwise clamp.
inline void ogd_step(std::span<double> w, std::span<const double> grad, double eta,
                     double bound) {
    detail::check_same_size(w.size(), grad.size(), "ogd_step");
    if (!(eta > 0.0)) throw std::invalid_argument("ogd_step: eta must be positive");
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::clamp(w[i] - eta * grad[i], -bound, bound);
    }
}

}  // namespace gln

#endif  // GLN_MIXER_HPP
