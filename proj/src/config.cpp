#include "gln/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace gln {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        config.set(key, value);
    }
    return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ExperimentConfig::serialize() const {
    std::string out;
    for (const auto& key : order_) {
        out += key;
        out += " = ";
        out += values_.at(key);
        out += '\n';
    }
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (values_.insert_or_assign(key, value).second) order_.push_back(key);
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ExperimentConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + it->second);
    }
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size()) {
        throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    }
    return v;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size()) {
        throw ConfigError("config key '" + key + "': not an unsigned integer: " + it->second);
    }
    return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + it->second);
}

std::vector<std::uint32_t> ExperimentConfig::get_widths(const std::string& key,
                                                        const std::string& fallback) const {
    const std::string text = get_or(key, fallback);
    std::vector<std::uint32_t> widths;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto dash = text.find('-', pos);
        const std::string part =
            dash == std::string::npos ? text.substr(pos) : text.substr(pos, dash - pos);
        std::uint32_t v = 0;
        const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || p != part.data() + part.size() || v == 0) {
            throw ConfigError("config key '" + key + "': bad layer widths: " + text);
        }
        widths.push_back(v);
        if (dash == std::string::npos) break;
        pos = dash + 1;
    }
    if (widths.empty()) throw ConfigError("config key '" + key + "': empty widths");
    return widths;
}

LearningRateSchedule ExperimentConfig::get_schedule(const std::string& key,
                                                    const std::string& fallback) const {
    const std::string text = get_or(key, fallback);
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = text.find(':', pos);
        parts.push_back(colon == std::string::npos ? text.substr(pos)
                                                   : text.substr(pos, colon - pos));
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    try {
        if (parts.size() == 2 && parts[0] == "constant") {
            return LearningRateSchedule::constant(std::stod(parts[1]));
        }
        if (parts.size() == 2 && parts[0] == "inverse") {
            return LearningRateSchedule::inverse_time(std::stod(parts[1]));
        }
        if (parts.size() == 3 && parts[0] == "capped") {
            return LearningRateSchedule::capped_inverse_time(std::stod(parts[1]),
                                                             std::stod(parts[2]));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad schedule: " + text);
    }
    throw ConfigError("config key '" + key + "': bad schedule: " + text +
                      " (want constant:C, inverse:C, or capped:C:CAP)");
}

}  // namespace gln
