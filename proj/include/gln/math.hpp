#ifndef GLN_MATH_HPP
#define GLN_MATH_HPP

#include <cmath>
#include <stdexcept>

namespace gln {

/// σ(x) = 1 / (1 + e^{-x}); saturates smoothly, never throws.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// logit(p) = log(p / (1-p)), the inverse of sigmoid on (0,1).
inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("logit: argument must lie in (0,1)");
    }
    return std::log(p) - std::log1p(-p);
}

/// Clamp a probability to [eps, 1-eps]. eps must lie in (0, 1/2).
inline double clip_probability(double p, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) {
        throw std::invalid_argument("clip_probability: eps must lie in (0, 1/2)");
    }
    return std::min(std::max(p, eps), 1.0 - eps);
}

/// log(1 + e^x) without overflow; used for stable log losses.
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

/// KL divergence between Bernoulli(p) and Bernoulli(q) in nats.
/// p may sit on the boundary (0·log 0 = 0); q must be interior.
inline double bernoulli_kl(double p, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("bernoulli_kl: q must lie in (0,1)");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("bernoulli_kl: p must lie in [0,1]");
    }
    double kl = 0.0;
    if (p > 0.0) kl += p * (std::log(p) - std::log(q));
    if (p < 1.0) kl += (1.0 - p) * (std::log1p(-p) - std::log1p(-q));
    return kl < 0.0 ? 0.0 : kl;  // guard tiny negative rounding at p == q
}

/// Bias constant β = e/(1+e), chosen so that logit(β) = 1.
inline double default_beta() {
    const double e = std::exp(1.0);
    return e / (1.0 + e);
}

}  // namespace gln

#endif  // GLN_MATH_HPP
