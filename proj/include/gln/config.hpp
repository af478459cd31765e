#ifndef GLN_CONFIG_HPP
#define GLN_CONFIG_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gln/schedule.hpp"

namespace gln {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key = value experiment configuration. Keys keep their insertion
/// order so a serialized config diffs cleanly; whatever ran is embedded
/// verbatim in the run's metadata.
class ExperimentConfig {
public:
    ExperimentConfig() = default;

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);

    /// Canonical "key = value" lines; parse(serialize()) == *this.
    std::string serialize() const;

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    const std::vector<std::string>& keys() const { return order_; }

    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Dashed layer widths, e.g. "50-25-1".
    std::vector<std::uint32_t> get_widths(const std::string& key,
                                          const std::string& fallback) const;

    /// Schedule syntax: "constant:C", "inverse:C", or "capped:C:CAP".
    LearningRateSchedule get_schedule(const std::string& key,
                                      const std::string& fallback) const;

    bool operator==(const ExperimentConfig& other) const { return values_ == other.values_; }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

}  // namespace gln

#endif  // GLN_CONFIG_HPP
