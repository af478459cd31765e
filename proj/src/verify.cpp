#include "gln/verify.hpp"

#include <cmath>
#include <sstream>

#include "gln/base_models.hpp"
#include "gln/math.hpp"
#include "gln/mixer.hpp"
#include "gln/network.hpp"
#include "gln/random.hpp"
#include "gln/switching.hpp"

namespace gln {

namespace {

std::string format_max(const char* label, double v) {
    std::ostringstream ss;
    ss << label << " " << v;
    return ss.str();
}

}  // namespace

VerifyResult verify_gradient_oracle(std::uint64_t samples, std::uint64_t seed) {
    RandomSource rng(seed);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const std::size_t m = 1 + rng.below(8);
        std::vector<double> w(m), p(m);
        for (auto& wi : w) wi = rng.uniform(-2.0, 2.0);
        for (auto& pi : p) pi = rng.uniform(0.05, 0.95);
        const int x = rng.bernoulli(0.5) ? 1 : 0;

        const auto grad = geo_gradient(w, p, x);
        for (std::size_t i = 0; i < m; ++i) {
            const double saved = w[i];
            w[i] = saved + h;
            const double up = geo_loss(w, p, x);
            w[i] = saved - h;
            const double down = geo_loss(w, p, x);
            w[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            // denominator floored so the check stays meaningful where the
            // finite difference itself is dominated by cancellation noise
            const double rel = std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-4);
            worst = std::max(worst, rel);
        }
    }
    VerifyResult result;
    result.name = "gradient finite differences";
    result.pass = worst <= 1e-5;
    result.detail = format_max("max relative error", worst);
    return result;
}

VerifyResult verify_forward_identity(std::uint32_t networks, std::uint64_t seed) {
    RandomSource rng(seed);
    double worst = 0.0;
    bool clip_hit = false;
    for (std::uint32_t n = 0; n < networks; ++n) {
        NetworkSpec spec;
        spec.base_width = 1 + static_cast<std::uint32_t>(rng.below(3));
        const std::uint32_t layer_count = 1 + static_cast<std::uint32_t>(rng.below(3));
        spec.widths.clear();
        for (std::uint32_t i = 0; i + 1 < layer_count; ++i) {
            spec.widths.push_back(1 + static_cast<std::uint32_t>(rng.below(4)));
        }
        spec.widths.push_back(1);
        spec.side_dim = 2;
        spec.eps = 0.01;
        spec.weight_bound = 1.0;
        spec.init = InitScheme::Zero;
        spec.lr = LearningRateSchedule::constant(0.05);
        spec.contexts = {ContextSource::halfspace_gaussian(1, 1.0, 0.5)};

        RandomSource net_rng = rng.derive(n);
        GatedLinearNetwork net(spec, net_rng);

        // a few small updates so the weights are non-trivial but the
        // activations stay far from the clipping bounds
        ForwardTrace trace;
        std::vector<double> base(spec.base_width);
        for (int step = 0; step < 20; ++step) {
            for (auto& b : base) b = net_rng.uniform(0.3, 0.7);
            const double z[2] = {net_rng.uniform(-1.0, 1.0), net_rng.uniform(-1.0, 1.0)};
            net.forward(base, z, trace);
            net.update(trace, net_rng.bernoulli(0.5) ? 1 : 0, step + 1);
        }

        for (int probe = 0; probe < 5; ++probe) {
            for (auto& b : base) b = net_rng.uniform(0.3, 0.7);
            const double z[2] = {net_rng.uniform(-1.0, 1.0), net_rng.uniform(-1.0, 1.0)};
            net.forward(base, z, trace);

            const double clip_limit = -logit(spec.eps);
            for (const auto& layer : trace.preact) {
                for (double a : layer) {
                    if (std::abs(a) >= clip_limit) clip_hit = true;
                }
            }

            // explicit product of the selected, bias-augmented matrices
            std::vector<double> vec = trace.logit_in[0];
            for (std::uint32_t i = 0; i < net.layers(); ++i) {
                std::vector<double> next(net.width(i) + 1, 0.0);
                next[0] = vec[0];  // bias row keeps logit(beta)
                for (std::uint32_t j = 0; j < net.width(i); ++j) {
                    const auto row = net.neuron(i, j).row(trace.ctx_id[i][j]);
                    double acc = 0.0;
                    for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * vec[k];
                    next[j + 1] = acc;
                }
                vec = std::move(next);
            }
            const double direct = sigmoid(trace.top_preact());
            const double product = sigmoid(vec[1]);
            worst = std::max(worst, std::abs(direct - product));
        }
    }
    VerifyResult result;
    result.name = "forward pass vs matrix product";
    result.pass = worst <= 1e-10 && !clip_hit;
    result.detail = format_max("max abs deviation", worst) + (clip_hit ? " (clipping hit)" : "");
    return result;
}

VerifyResult verify_switching_bruteforce(std::uint32_t max_n, std::uint64_t seed) {
    RandomSource rng(seed);
    double worst_marginal = 0.0;
    double worst_bound_slack = -1e300;

    for (std::size_t model_count : {2u, 3u}) {
        // fixed per-round model predictions, shared by both computations
        std::vector<std::vector<double>> q(model_count, std::vector<double>(max_n));
        for (auto& qi : q) {
            for (auto& qt : qi) qt = rng.uniform(0.05, 0.95);
        }

        // regret bound on the prior, exhaustive over model sequences
        for (std::uint32_t n = 1; n <= max_n; ++n) {
            std::vector<std::uint32_t> nu(n, 0);
            while (true) {
                const double mass = switch_prior_mass(nu, model_count);
                std::uint32_t switches = 0;
                for (std::uint32_t t = 1; t < n; ++t) switches += nu[t] != nu[t - 1] ? 1 : 0;
                const double bound = (switches + 1.0) *
                                     (std::log(static_cast<double>(model_count)) +
                                      std::log(static_cast<double>(n)));
                worst_bound_slack = std::max(worst_bound_slack, -std::log(mass) - bound);

                std::size_t pos = 0;
                while (pos < n && ++nu[pos] == model_count) nu[pos++] = 0;
                if (pos == n) break;
            }
        }

        // incremental recursion vs direct Eq-12 sum, all binary sequences
        for (std::uint32_t n = 1; n <= max_n; ++n) {
            for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
                std::vector<int> x(n);
                for (std::uint32_t t = 0; t < n; ++t) x[t] = (bits >> t) & 1;

                SwitchingMixture mix(model_count);
                double log_marginal = 0.0;
                std::vector<double> preds(model_count);
                for (std::uint32_t t = 0; t < n; ++t) {
                    for (std::size_t i = 0; i < model_count; ++i) preds[i] = q[i][t];
                    const double tau = mix.predict(preds);
                    log_marginal += std::log(x[t] ? tau : 1.0 - tau);
                    mix.update(preds, x[t]);
                }
                const double incremental = std::exp(log_marginal);

                // brute force over all |M|^n model sequences
                double direct = 0.0;
                std::vector<std::uint32_t> nu(n, 0);
                while (true) {
                    double lik = 1.0;
                    for (std::uint32_t t = 0; t < n; ++t) {
                        const double rho = q[nu[t]][t];
                        lik *= x[t] ? rho : 1.0 - rho;
                    }
                    direct += switch_prior_mass(nu, model_count) * lik;
                    std::size_t pos = 0;
                    while (pos < n && ++nu[pos] == model_count) nu[pos++] = 0;
                    if (pos == n) break;
                }
                worst_marginal = std::max(worst_marginal, std::abs(incremental - direct));
            }
        }
    }

    VerifyResult result;
    result.name = "switching recursion vs brute force";
    result.pass = worst_marginal <= 1e-9 && worst_bound_slack <= 1e-12;
    result.detail = format_max("max marginal deviation", worst_marginal) + ", " +
                    format_max("max prior-bound slack", worst_bound_slack);
    return result;
}

namespace {

// Closed-form log P_KT via log-gamma: an independent route to the marginal.
double log_kt_marginal(std::uint64_t zeros, std::uint64_t ones) {
    const double a = static_cast<double>(zeros);
    const double b = static_cast<double>(ones);
    return std::lgamma(a + 0.5) + std::lgamma(b + 0.5) - 2.0 * std::lgamma(0.5) -
           std::lgamma(a + b + 1.0) + std::lgamma(1.0);
}

double zr_marginal_direct(const std::vector<int>& x) {
    std::uint64_t zeros = 0, ones = 0;
    for (int b : x) (b ? ones : zeros)++;
    double p = 0.5 * std::exp(log_kt_marginal(zeros, ones));
    if (ones == 0) p += 0.25;
    if (zeros == 0) p += 0.25;
    return p;
}

}  // namespace

VerifyResult verify_zr_exhaustive(std::uint32_t max_n) {
    double worst = 0.0;
    for (std::uint32_t n = 1; n <= max_n; ++n) {
        for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
            std::vector<int> x(n);
            for (std::uint32_t t = 0; t < n; ++t) x[t] = (bits >> t) & 1;

            ZRCounter counter;
            double log_marginal = 0.0;
            for (int b : x) {
                const double p1 = counter.predict_one();
                log_marginal += std::log(b ? p1 : 1.0 - p1);
                counter.update(b);
            }
            const double sequential = std::exp(log_marginal);
            const double direct = zr_marginal_direct(x);
            worst = std::max(worst, std::abs(sequential - direct));
        }
    }

    // dominance on the all-zeros sequence: -log P_ZR(0^n) <= log 4 at every n
    bool dominated = true;
    ZRCounter zeros_counter;
    const double log4 = std::log(4.0);
    for (std::uint32_t n = 1; n <= 10000; ++n) {
        zeros_counter.update(0);
        if (-zeros_counter.log_marginal() > log4 + 1e-12) {
            dominated = false;
            break;
        }
    }

    VerifyResult result;
    result.name = "zero-redundancy estimator vs closed form";
    result.pass = worst <= 1e-12 && dominated;
    result.detail = format_max("max marginal deviation", worst) +
                    (dominated ? "" : ", deterministic dominance violated");
    return result;
}

std::vector<VerifyResult> run_all_verifications() {
    return {verify_gradient_oracle(), verify_forward_identity(), verify_switching_bruteforce(),
            verify_zr_exhaustive()};
}

}  // namespace gln
