#include "gln/context.hpp"

#include <cctype>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "gln/serialize.hpp"

namespace gln {

namespace {

constexpr std::uint32_t kDeadIndex = 0xFFFFFFFFu;

std::uint32_t context_space_size(const ContextFunction::Node& node) {
    struct Sizer {
        std::uint32_t operator()(const ConstantContext&) const { return 1; }
        std::uint32_t operator()(const HalfSpaceContext&) const { return 2; }
        std::uint32_t operator()(const SkipGramContext& c) const {
            if (c.indices.size() >= 31) throw std::invalid_argument("skip-gram: too many bits");
            return 1u << c.indices.size();
        }
        std::uint32_t operator()(const ComposedContext& c) const {
            std::uint64_t n = 1;
            for (const auto& part : c.parts) {
                n *= part.size();
                if (n > 0x7FFFFFFFu) throw std::invalid_argument("composed context: space overflow");
            }
            return static_cast<std::uint32_t>(n);
        }
        std::uint32_t operator()(const MaxPoolContext& c) const {
            if (c.regions.size() >= 31) throw std::invalid_argument("max-pool: too many regions");
            return 1u << c.regions.size();
        }
        std::uint32_t operator()(const DistanceContext& c) const {
            return static_cast<std::uint32_t>(c.probes.size()) + 1;
        }
    };
    return std::visit(Sizer{}, node);
}

inline bool pixel_active(std::span<const double> z, std::uint32_t idx) {
    if (idx == kDeadIndex) return false;
    if (idx >= z.size()) throw std::out_of_range("context: pixel index out of bounds");
    return z[idx] >= 0.5;
}

}  // namespace

ContextFunction::ContextFunction() : ContextFunction(Node{ConstantContext{}}) {}

ContextFunction::ContextFunction(Node node)
    : node_(std::make_shared<const Node>(std::move(node))),
      size_(context_space_size(*node_)) {}

std::uint32_t ContextFunction::operator()(std::span<const double> z) const {
    struct Eval {
        std::span<const double> z;

        std::uint32_t operator()(const ConstantContext&) const { return 0; }

        std::uint32_t operator()(const HalfSpaceContext& c) const {
            if (z.size() != c.normal.size()) {
                throw std::invalid_argument("half-space context: dimension mismatch");
            }
            double dot = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) dot += z[i] * c.normal[i];
            return dot >= c.offset ? 1u : 0u;
        }

        std::uint32_t operator()(const SkipGramContext& c) const {
            std::uint32_t id = 0;
            for (std::uint32_t idx : c.indices) {
                id = (id << 1) | (pixel_active(z, idx) ? 1u : 0u);
            }
            return id;
        }

        std::uint32_t operator()(const ComposedContext& c) const {
            // left-to-right Horner form of the mixed-radix sum
            std::uint32_t id = 0;
            for (const auto& part : c.parts) id = id * part.size() + part(z);
            return id;
        }

        std::uint32_t operator()(const MaxPoolContext& c) const {
            std::uint32_t id = 0;
            for (const auto& region : c.regions) {
                bool hit = false;
                for (std::uint32_t idx : region) {
                    if (pixel_active(z, idx)) {
                        hit = true;
                        break;
                    }
                }
                id = (id << 1) | (hit ? 1u : 0u);
            }
            return id;
        }

        std::uint32_t operator()(const DistanceContext& c) const {
            for (std::size_t k = 0; k < c.probes.size(); ++k) {
                if (pixel_active(z, c.probes[k])) return static_cast<std::uint32_t>(k) + 1;
            }
            return 0;
        }
    };
    return std::visit(Eval{z}, *node_);
}

ContextFunction ContextFunction::constant() { return ContextFunction(Node{ConstantContext{}}); }

ContextFunction ContextFunction::half_space(std::vector<double> normal, double offset) {
    if (normal.empty()) throw std::invalid_argument("half-space context: empty normal");
    return ContextFunction(Node{HalfSpaceContext{std::move(normal), offset}});
}

ContextFunction ContextFunction::skip_gram(std::vector<std::uint32_t> indices) {
    return ContextFunction(Node{SkipGramContext{std::move(indices)}});
}

ContextFunction ContextFunction::composed(std::vector<ContextFunction> parts) {
    if (parts.empty()) throw std::invalid_argument("composed context: no parts");
    return ContextFunction(Node{ComposedContext{std::move(parts)}});
}

ContextFunction ContextFunction::max_pool(std::vector<std::vector<std::uint32_t>> regions) {
    return ContextFunction(Node{MaxPoolContext{std::move(regions)}});
}

ContextFunction ContextFunction::distance(std::vector<std::uint32_t> probes) {
    return ContextFunction(Node{DistanceContext{std::move(probes)}});
}

void save_context(ByteWriter& w, const ContextFunction& ctx) {
    struct Save {
        ByteWriter& w;
        void operator()(const ConstantContext&) { w.u8(0); }
        void operator()(const HalfSpaceContext& c) {
            w.u8(1);
            w.u32(static_cast<std::uint32_t>(c.normal.size()));
            for (double v : c.normal) w.f64(v);
            w.f64(c.offset);
        }
        void operator()(const SkipGramContext& c) {
            w.u8(2);
            w.u32(static_cast<std::uint32_t>(c.indices.size()));
            for (auto i : c.indices) w.u32(i);
        }
        void operator()(const ComposedContext& c) {
            w.u8(3);
            w.u32(static_cast<std::uint32_t>(c.parts.size()));
            for (const auto& part : c.parts) save_context(w, part);
        }
        void operator()(const MaxPoolContext& c) {
            w.u8(4);
            w.u32(static_cast<std::uint32_t>(c.regions.size()));
            for (const auto& region : c.regions) {
                w.u32(static_cast<std::uint32_t>(region.size()));
                for (auto i : region) w.u32(i);
            }
        }
        void operator()(const DistanceContext& c) {
            w.u8(5);
            w.u32(static_cast<std::uint32_t>(c.probes.size()));
            for (auto i : c.probes) w.u32(i);
        }
    };
    std::visit(Save{w}, ctx.node());
}

ContextFunction load_context(ByteReader& r) {
    switch (r.u8()) {
        case 0: return ContextFunction::constant();
        case 1: {
            std::vector<double> normal(r.u32());
            for (auto& v : normal) v = r.f64();
            const double offset = r.f64();
            return ContextFunction::half_space(std::move(normal), offset);
        }
        case 2: {
            std::vector<std::uint32_t> indices(r.u32());
            for (auto& i : indices) i = r.u32();
            return ContextFunction::skip_gram(std::move(indices));
        }
        case 3: {
            std::vector<ContextFunction> parts;
            const std::uint32_t n = r.u32();
            parts.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) parts.push_back(load_context(r));
            return ContextFunction::composed(std::move(parts));
        }
        case 4: {
            std::vector<std::vector<std::uint32_t>> regions(r.u32());
            for (auto& region : regions) {
                region.resize(r.u32());
                for (auto& i : region) i = r.u32();
            }
            return ContextFunction::max_pool(std::move(regions));
        }
        case 5: {
            std::vector<std::uint32_t> probes(r.u32());
            for (auto& i : probes) i = r.u32();
            return ContextFunction::distance(std::move(probes));
        }
        default: throw std::runtime_error("checkpoint: unknown context kind");
    }
}

ContextFunction sample_halfspace(RandomSource& rng, std::uint32_t dim, double sigma_v,
                                 double sigma_b) {
    if (dim == 0) throw std::invalid_argument("sample_halfspace: dim must be positive");
    if (sigma_v < 0.0 || sigma_b < 0.0) {
        throw std::invalid_argument("sample_halfspace: negative standard deviation");
    }
    std::vector<double> v(dim);
    for (auto& vi : v) vi = rng.normal(0.0, sigma_v);
    const double offset = rng.normal(0.0, sigma_b);
    return ContextFunction::half_space(std::move(v), offset);
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

bool causal_offset(const PixelOffset& o) {
    return o.drow < 0 || (o.drow == 0 && o.dcol < 0);
}

// Maps an offset to an absolute pixel index, or kDeadIndex when the probe
// falls outside the image.
std::uint32_t bind_offset(const PixelOffset& o, std::uint32_t pixel, std::uint32_t rows,
                          std::uint32_t cols) {
    if (!causal_offset(o)) {
        throw std::invalid_argument("context preset: non-causal offset (" +
                                    std::to_string(o.drow) + "," + std::to_string(o.dcol) + ")");
    }
    const int row = static_cast<int>(pixel / cols) + o.drow;
    const int col = static_cast<int>(pixel % cols) + o.dcol;
    if (row < 0 || col < 0 || row >= static_cast<int>(rows) || col >= static_cast<int>(cols)) {
        return kDeadIndex;
    }
    return static_cast<std::uint32_t>(row) * cols + static_cast<std::uint32_t>(col);
}

}  // namespace

ContextFunction instantiate_preset(const ContextPreset& preset, std::uint32_t pixel,
                                   std::uint32_t rows, std::uint32_t cols) {
    if (pixel >= rows * cols) throw std::invalid_argument("instantiate_preset: pixel out of range");
    switch (preset.kind) {
        case ContextPreset::Kind::SkipGram: {
            std::vector<std::uint32_t> indices;
            indices.reserve(preset.groups.size());
            for (const auto& group : preset.groups) {
                if (group.size() != 1) {
                    throw std::invalid_argument("skip-gram preset: one offset per bit expected");
                }
                indices.push_back(bind_offset(group[0], pixel, rows, cols));
            }
            return ContextFunction::skip_gram(std::move(indices));
        }
        case ContextPreset::Kind::MaxPool: {
            std::vector<std::vector<std::uint32_t>> regions;
            regions.reserve(preset.groups.size());
            for (const auto& group : preset.groups) {
                std::vector<std::uint32_t> region;
                for (const auto& o : group) {
                    const std::uint32_t idx = bind_offset(o, pixel, rows, cols);
                    if (idx != kDeadIndex) region.push_back(idx);
                }
                regions.push_back(std::move(region));
            }
            return ContextFunction::max_pool(std::move(regions));
        }
        case ContextPreset::Kind::Distance: {
            if (preset.groups.size() != 1) {
                throw std::invalid_argument("distance preset: a single probe group expected");
            }
            std::vector<std::uint32_t> probes;
            probes.reserve(preset.groups[0].size());
            for (const auto& o : preset.groups[0]) {
                probes.push_back(bind_offset(o, pixel, rows, cols));
            }
            return ContextFunction::distance(std::move(probes));
        }
    }
    throw std::logic_error("instantiate_preset: unreachable");
}

ContextPreset sample_skipgram_preset(RandomSource& rng, std::uint32_t bits, int max_up,
                                     int max_left, int max_right) {
    if (bits == 0 || max_up < 0 || max_left < 0 || max_right < 0) {
        throw std::invalid_argument("sample_skipgram_preset: bad window");
    }
    ContextPreset preset;
    preset.kind = ContextPreset::Kind::SkipGram;
    preset.name = "sampled";
    if (max_left == 0 && max_up == 0) {
        throw std::invalid_argument("sample_skipgram_preset: empty causal window");
    }
    std::set<std::pair<int, int>> seen;
    while (preset.groups.size() < bits) {
        const int dr = -static_cast<int>(rng.below(static_cast<std::uint64_t>(max_up) + 1));
        int dc;
        if (dr == 0) {
            if (max_left == 0) continue;
            dc = -1 - static_cast<int>(rng.below(static_cast<std::uint64_t>(max_left)));
        } else {
            dc = -max_left +
                 static_cast<int>(rng.below(static_cast<std::uint64_t>(max_left + max_right) + 1));
        }
        const PixelOffset o{dr, dc};
        if (!seen.insert({o.drow, o.dcol}).second) continue;
        preset.groups.push_back({o});
    }
    return preset;
}

// ---------------------------------------------------------------------------
// Preset file parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
    throw std::runtime_error("context presets: line " + std::to_string(line_no) + ": " + msg);
}

PixelOffset parse_offset(std::size_t line_no, const std::string& tok) {
    PixelOffset o;
    char lparen = 0, comma = 0, rparen = 0;
    std::istringstream ss(tok);
    if (!(ss >> lparen >> o.drow >> comma >> o.dcol >> rparen) || lparen != '(' ||
        comma != ',' || rparen != ')' || (ss >> std::ws, !ss.eof())) {
        parse_fail(line_no, "expected offset of the form (drow,dcol), got '" + tok + "'");
    }
    return o;
}

}  // namespace

std::vector<ContextPreset> parse_context_presets(std::istream& in) {
    std::vector<ContextPreset> presets;
    std::string line;
    std::size_t line_no = 0;
    bool version_seen = false;
    std::set<std::string> names;

    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);

        // split, treating braces as their own tokens
        std::vector<std::string> toks;
        std::string cur;
        for (char ch : line) {
            if (ch == '{' || ch == '}') {
                if (!cur.empty()) toks.push_back(std::exchange(cur, {}));
                toks.push_back(std::string(1, ch));
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!cur.empty()) toks.push_back(std::exchange(cur, {}));
            } else {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) toks.push_back(cur);
        if (toks.empty()) continue;

        if (!version_seen) {
            if (toks.size() != 2 || toks[0] != "version" || toks[1] != "1") {
                parse_fail(line_no, "file must start with 'version 1'");
            }
            version_seen = true;
            continue;
        }

        ContextPreset preset;
        if (toks[0] == "skipgram") {
            preset.kind = ContextPreset::Kind::SkipGram;
        } else if (toks[0] == "maxpool") {
            preset.kind = ContextPreset::Kind::MaxPool;
        } else if (toks[0] == "distance") {
            preset.kind = ContextPreset::Kind::Distance;
        } else {
            parse_fail(line_no, "unknown preset kind '" + toks[0] + "'");
        }
        if (toks.size() < 3) parse_fail(line_no, "expected: kind name offsets...");
        preset.name = toks[1];
        if (!names.insert(preset.name).second) {
            parse_fail(line_no, "duplicate preset name '" + preset.name + "'");
        }

        if (preset.kind == ContextPreset::Kind::MaxPool) {
            std::size_t i = 2;
            while (i < toks.size()) {
                if (toks[i] != "{") parse_fail(line_no, "expected '{' to open a region");
                std::vector<PixelOffset> region;
                for (++i; i < toks.size() && toks[i] != "}"; ++i) {
                    region.push_back(parse_offset(line_no, toks[i]));
                }
                if (i == toks.size()) parse_fail(line_no, "unterminated region");
                if (region.empty()) parse_fail(line_no, "empty region");
                preset.groups.push_back(std::move(region));
                ++i;
            }
            if (preset.groups.empty()) parse_fail(line_no, "max-pool preset needs regions");
        } else {
            std::vector<PixelOffset> flat;
            for (std::size_t i = 2; i < toks.size(); ++i) {
                flat.push_back(parse_offset(line_no, toks[i]));
            }
            if (preset.kind == ContextPreset::Kind::Distance) {
                preset.groups.push_back(std::move(flat));
            } else {
                for (const auto& o : flat) preset.groups.push_back({o});
            }
        }

        for (const auto& group : preset.groups) {
            for (const auto& o : group) {
                if (!causal_offset(o)) {
                    parse_fail(line_no, "non-causal offset (" + std::to_string(o.drow) + "," +
                                            std::to_string(o.dcol) + ")");
                }
            }
        }
        presets.push_back(std::move(preset));
    }
    if (!version_seen) throw std::runtime_error("context presets: empty file");
    return presets;
}

const char* builtin_context_presets_text() {
    // Keep in sync with data/context_presets.txt (checked by a unit test).
    return R"(# Context preset table, format version 1.
#
# Grammar (one preset per line, '#' starts a comment):
#   skipgram NAME (drow,dcol) ...            one offset per bit, big-endian
#   maxpool  NAME { (drow,dcol) ... } ...    one braced group per region
#   distance NAME (drow,dcol) ...            probe order, nearest first
#
# Offsets are relative to the pixel being predicted and must be causal
# under row-major order: drow < 0, or drow == 0 and dcol < 0. Probes that
# fall outside the image are dead (never active) at that pixel.
version 1

# immediate neighbourhood
skipgram sg_w1 (0,-1)
skipgram sg_n1 (-1,0)
skipgram sg_nw (-1,-1)
skipgram sg_ne (-1,1)
skipgram sg_w2 (0,-1) (0,-2)
skipgram sg_n2 (-1,0) (-2,0)
skipgram sg_corner (0,-1) (-1,0)
skipgram sg_quad (0,-1) (-1,-1) (-1,0) (-1,1)
skipgram sg_row3 (0,-1) (0,-2) (0,-3)
skipgram sg_diag2 (-1,-1) (-2,-2)
skipgram sg_wide (0,-1) (-1,2)
skipgram sg_far_w (0,-4)
skipgram sg_far_n (-4,0)
skipgram sg_skip_row (-2,0) (-2,-1)

# pooled neighbourhoods
maxpool mp_west_north { (0,-1) (0,-2) (0,-3) } { (-1,0) (-2,0) (-3,0) }
maxpool mp_rows { (-1,-2) (-1,-1) (-1,0) (-1,1) (-1,2) } { (-2,-2) (-2,-1) (-2,0) (-2,1) (-2,2) }
maxpool mp_block { (0,-1) (-1,-1) (-1,0) (-1,1) }
maxpool mp_quads { (0,-1) (0,-2) } { (-1,0) (-2,0) } { (-1,-1) (-2,-2) } { (-1,1) (-2,2) }
maxpool mp_far { (-3,-3) (-3,0) (-3,3) } { (0,-3) (-1,-3) }

# distance probes
distance d_west (0,-1) (0,-2) (0,-3) (0,-4) (0,-5) (0,-6)
distance d_north (-1,0) (-2,0) (-3,0) (-4,0) (-5,0) (-6,0)
distance d_diag (-1,-1) (-2,-2) (-3,-3) (-4,-4)
distance d_scan (0,-1) (0,-2) (-1,2) (-1,1) (-1,0) (-1,-1) (-1,-2)
distance d_ring (0,-1) (-1,0) (-1,-1) (-1,1) (0,-2) (-2,0) (-2,-2) (-2,2)
)";
}

const std::vector<ContextPreset>& builtin_context_presets() {
    static const std::vector<ContextPreset> presets = [] {
        std::istringstream in(builtin_context_presets_text());
        return parse_context_presets(in);
    }();
    return presets;
}

}  // namespace gln
