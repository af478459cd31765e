#ifndef GLN_SWITCHING_HPP
#define GLN_SWITCHING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gln/serialize.hpp"

namespace gln {

/// Bayesian mixture over sequences of models under the run-length prior,
/// maintained through the O(|M|) normalized-weight recursion. Weights start
/// uniform and are renormalized to sum to one after every update.
class SwitchingMixture {
public:
    SwitchingMixture() = default;
    explicit SwitchingMixture(std::size_t model_count);

    std::size_t size() const { return u_.size(); }
    std::uint64_t round() const { return t_; }
    const std::vector<double>& weights() const { return u_; }

    /// τ(x = 1 | past) = Σ_i u_i · preds_i.
    double predict(std::span<const double> preds) const;

    /// Observe x and advance the posterior one round. `preds` must be the
    /// same vector the models produced for this round.
    void update(std::span<const double> preds, int x);

    void save(ByteWriter& w) const;
    static SwitchingMixture load(ByteReader& r);

private:
    std::vector<double> u_;
    std::uint64_t t_ = 1;
};

/// Prior mass of one concrete model sequence under the run-length prior:
///   w(empty) = 1,  w(ν_1) = 1/|M|,
///   w(ν_1:n) = w(ν_1:n-1) · [ (n-1)/n    if ν_n = ν_{n-1}
///                             1/(n(|M|-1)) otherwise ].
double switch_prior_mass(std::span<const std::uint32_t> sequence, std::size_t model_count);

}  // namespace gln

#endif  // GLN_SWITCHING_HPP
