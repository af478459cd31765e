#ifndef GLN_SCHEDULE_HPP
#define GLN_SCHEDULE_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace gln {

/// Learning-rate schedule η_t as a function of the 1-based round index.
/// Three shapes cover everything the experiments use:
///   constant:         η_t = c
///   inverse_time:     η_t = c / t
///   capped_inverse:   η_t = min(c / t, cap)
struct LearningRateSchedule {
    enum class Kind : std::uint8_t { Constant = 0, InverseTime = 1, CappedInverseTime = 2 };

    Kind kind = Kind::Constant;
    double c = 0.01;
    double cap = 0.0;

    double operator()(std::uint64_t t) const {
        switch (kind) {
            case Kind::Constant: return c;
            case Kind::InverseTime: return c / static_cast<double>(t < 1 ? 1 : t);
            case Kind::CappedInverseTime:
                return std::min(c / static_cast<double>(t < 1 ? 1 : t), cap);
        }
        return c;
    }

    static LearningRateSchedule constant(double c) {
        check_positive(c);
        return {Kind::Constant, c, 0.0};
    }
    static LearningRateSchedule inverse_time(double c) {
        check_positive(c);
        return {Kind::InverseTime, c, 0.0};
    }
    static LearningRateSchedule capped_inverse_time(double c, double cap) {
        check_positive(c);
        check_positive(cap);
        return {Kind::CappedInverseTime, c, cap};
    }

    bool operator==(const LearningRateSchedule&) const = default;

private:
    static void check_positive(double v) {
        if (!(v > 0.0)) throw std::invalid_argument("learning rate parameters must be positive");
    }
};

}  // namespace gln

#endif  // GLN_SCHEDULE_HPP
