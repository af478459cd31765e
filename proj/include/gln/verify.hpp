#ifndef GLN_VERIFY_HPP
#define GLN_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gln {

/// Outcome of one oracle suite. `detail` carries the measured extremes so
/// failures are diagnosable from the verify output alone.
struct VerifyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Analytic gradient vs central finite differences of the loss
/// (step 1e-6) over random (w, p, x) with m in {1..8}.
VerifyResult verify_gradient_oracle(std::uint64_t samples = 10000, std::uint64_t seed = 11);

/// Layerwise forward pass vs the explicit product of selected weight
/// matrices on random small networks with no active clipping.
VerifyResult verify_forward_identity(std::uint32_t networks = 100, std::uint64_t seed = 12);

/// Incremental switching recursion vs the brute-force Bayes mixture over
/// all model sequences, plus the run-length prior regret bound, exhaustive
/// over binary sequences of length <= max_n and |M| in {2,3}.
VerifyResult verify_switching_bruteforce(std::uint32_t max_n = 8, std::uint64_t seed = 13);

/// Sequential ZR conditionals vs closed-form mixture marginals, exhaustive
/// over sequences of length <= max_n; deterministic-sequence dominance up
/// to n = 10^4.
VerifyResult verify_zr_exhaustive(std::uint32_t max_n = 10);

std::vector<VerifyResult> run_all_verifications();

}  // namespace gln

#endif  // GLN_VERIFY_HPP
