#ifndef GLN_BASE_MODELS_HPP
#define GLN_BASE_MODELS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gln/context.hpp"
#include "gln/serialize.hpp"

namespace gln {

/// Zero-Redundancy estimator for a binary memoryless source:
///   P_ZR(x_1:n) = 1/2 · P_KT(x_1:n) + 1/4 · [all zeros] + 1/4 · [all ones],
/// with P_KT the Krichevsky-Trofimov (add-1/2) marginal. The deterministic
/// point masses cap the loss on constant sequences at log 4.
class ZRCounter {
public:
    std::uint64_t zeros() const { return zeros_; }
    std::uint64_t ones() const { return ones_; }

    /// P_ZR(next = 1 | history).
    double predict_one() const;

    /// log P_ZR of everything observed so far.
    double log_marginal() const;

    void update(int x);

    void save(ByteWriter& w) const;
    static ZRCounter load(ByteReader& r);

private:
    std::uint64_t zeros_ = 0;
    std::uint64_t ones_ = 0;
    double kt_ = 1.0;  // P_KT of the history; meaningful while a count is zero
};

/// A skip-gram gated bank of ZR estimators: the context function (over
/// causal pixels) picks a counter, which predicts and then learns the pixel.
class SkipGramBaseModel {
public:
    SkipGramBaseModel() = default;
    explicit SkipGramBaseModel(ContextFunction ctx);

    double predict(std::span<const double> z) const;
    void update(std::span<const double> z, int x);

    const ContextFunction& context() const { return ctx_; }

    void save(ByteWriter& w) const;
    static SkipGramBaseModel load(ByteReader& r);

private:
    ContextFunction ctx_;
    std::vector<ZRCounter> table_;
};

/// Componentwise sigmoid of raw features, clipped into [eps, 1-eps].
std::vector<double> feature_base(std::span<const double> z, double eps);
void feature_base(std::span<const double> z, double eps, std::vector<double>& out);

/// The constant base predictor p(z) = alpha for every z.
class ConstantBase {
public:
    explicit ConstantBase(double alpha);
    double operator()() const { return alpha_; }

private:
    double alpha_;
};

}  // namespace gln

#endif  // GLN_BASE_MODELS_HPP
