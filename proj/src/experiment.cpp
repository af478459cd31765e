#include "gln/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gln/data.hpp"
#include "gln/serialize.hpp"
#include "gln/tasks.hpp"
#include "gln/version.hpp"

namespace gln {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void log_line(const LogFn& log, const std::string& line) {
    if (log) log(line);
}

struct MetricsWriter {
    std::ofstream csv;
    std::ofstream jsonl;
    bool with_accuracy = true;

    MetricsWriter(const fs::path& dir, bool accuracy) : with_accuracy(accuracy) {
        csv.open(dir / "metrics.csv", std::ios::trunc);
        jsonl.open(dir / "metrics.jsonl", std::ios::trunc);
        if (!csv || !jsonl) throw std::runtime_error("cannot open metrics files");
        csv << "example,loss_nats,accuracy\n";
    }

    void record(std::uint64_t example, double loss, double accuracy) {
        csv << example << "," << fmt_double(loss) << ",";
        if (with_accuracy) csv << fmt_double(accuracy);
        csv << "\n";
        json rec;
        rec["example"] = example;
        rec["loss_nats"] = loss;
        if (with_accuracy) rec["accuracy"] = accuracy;
        jsonl << rec.dump() << "\n";
    }
};

struct RunTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void write_metadata(const fs::path& dir, const ExperimentConfig& config, const json& summary,
                    double wall_seconds) {
    json meta;
    meta["library"] = "gln";
    meta["version"] = GLN_VERSION_STRING;
    meta["experiment"] = config.get("experiment");
    meta["seed"] = config.get_u64("seed", 1);
    json cfg;
    for (const auto& key : config.keys()) cfg[key] = config.get(key);
    meta["config"] = cfg;
    meta["summary"] = summary;
    // timing lives here, outside the deterministic metrics files
    meta["wall_time_sec"] = wall_seconds;
    std::ofstream out(dir / "metadata.json", std::ios::trunc);
    out << meta.dump(2) << "\n";
}

void write_checkpoint(const fs::path& dir, const std::string& experiment,
                      const std::function<void(ByteWriter&)>& payload) {
    ByteWriter w;
    w.u32(0x474C4E43u);  // "GLNC"
    w.u32(1);
    w.str(experiment);
    payload(w);
    write_file((dir / "checkpoint.gln").string(), w.bytes());
}

// ---------------------------------------------------------------------------
// Shared experiment pieces
// ---------------------------------------------------------------------------

CapacityConfig capacity_config_from(const ExperimentConfig& config) {
    CapacityConfig cc;
    cc.widths = config.get_widths("widths", "3-2-2-2-2-1");
    cc.rounds = config.get_u64("rounds", 200000);
    cc.alpha = config.get_double("alpha", 0.5);
    cc.eps = config.get_double("eps", 0.01);
    cc.weight_bound = config.get_double("weight_bound", 5.0);
    cc.lr = config.get_schedule("lr", "capped:40:0.4");
    cc.even_offsets = config.get_bool("even_offsets", false);
    cc.trivial_top = config.get_bool("trivial_top", false);
    cc.grid_points = static_cast<std::uint32_t>(config.get_u64("grid_points", 601));
    return cc;
}

struct MnistData {
    std::vector<std::vector<double>> train_images;  // scaled to [0,1]
    std::vector<std::uint8_t> train_labels;
    std::vector<std::vector<double>> test_images;
    std::vector<std::uint8_t> test_labels;
    std::uint32_t rows = 28, cols = 28;
};

std::vector<std::vector<double>> scale_images(const IdxTensor& tensor) {
    if (tensor.magic != IdxTensor::kImagesMagic || tensor.dims.size() != 3) {
        throw DatasetError("unexpected image tensor layout");
    }
    const std::size_t count = tensor.dims[0];
    const std::size_t pixels = static_cast<std::size_t>(tensor.dims[1]) * tensor.dims[2];
    std::vector<std::vector<double>> images(count);
    for (std::size_t i = 0; i < count; ++i) {
        images[i].resize(pixels);
        const std::uint8_t* src = tensor.payload.data() + i * pixels;
        for (std::size_t p = 0; p < pixels; ++p) images[i][p] = src[p] / 255.0;
    }
    return images;
}

MnistData load_mnist(const ExperimentConfig& config, std::uint64_t limit,
                     std::uint64_t test_limit) {
    const std::string dir = config.get_or("data_dir", "");
    if (dir.empty()) throw DatasetError("config key 'data_dir' is required for MNIST runs");
    MnistData data;
    try {
        const IdxTensor train_images = load_idx(dir + "/train-images-idx3-ubyte");
        const IdxTensor train_labels = load_idx(dir + "/train-labels-idx1-ubyte");
        const IdxTensor test_images = load_idx(dir + "/t10k-images-idx3-ubyte");
        const IdxTensor test_labels = load_idx(dir + "/t10k-labels-idx1-ubyte");
        if (train_labels.magic != IdxTensor::kLabelsMagic ||
            test_labels.magic != IdxTensor::kLabelsMagic) {
            throw DatasetError("unexpected label tensor layout");
        }
        data.rows = train_images.dims[1];
        data.cols = train_images.dims[2];
        data.train_images = scale_images(train_images);
        data.test_images = scale_images(test_images);
        data.train_labels = train_labels.payload;
        data.test_labels = test_labels.payload;
    } catch (const IdxError& e) {
        throw DatasetError(std::string("MNIST load failed: ") + e.what());
    }
    if (data.train_images.size() != data.train_labels.size() ||
        data.test_images.size() != data.test_labels.size()) {
        throw DatasetError("image/label counts disagree");
    }
    if (limit > 0 && limit < data.train_images.size()) {
        data.train_images.resize(limit);
        data.train_labels.resize(limit);
    }
    if (test_limit > 0 && test_limit < data.test_images.size()) {
        data.test_images.resize(test_limit);
        data.test_labels.resize(test_limit);
    }
    return data;
}

// ---------------------------------------------------------------------------
// gaussian / xor
// ---------------------------------------------------------------------------

void write_capacity_grid(const fs::path& dir, const CapacityResult& result) {
    std::ofstream out(dir / "grid_fit.csv", std::ios::trunc);
    out << "z,f";
    for (std::size_t i = 0; i < result.fit.size(); ++i) {
        for (std::size_t j = 0; j < result.fit[i].size(); ++j) {
            out << ",p_" << i + 1 << "_" << j;
        }
    }
    out << "\n";
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
        out << fmt_double(result.grid[g]) << "," << fmt_double(gaussian_truth(result.grid[g]));
        for (const auto& layer : result.fit) {
            for (const auto& fit : layer) out << "," << fmt_double(fit[g]);
        }
        out << "\n";
    }
}

json run_gaussian_capacity(const ExperimentConfig& config, const fs::path& dir,
                           const LogFn& log) {
    const CapacityConfig cc = capacity_config_from(config);
    RandomSource rng(config.get_u64("seed", 1));
    CapacityResult result = capacity_demo(cc, rng);

    // per-layer best (lowest) time-averaged loss
    json layer_loss = json::array();
    for (const auto& layer : result.cum_loss) {
        double best = layer.empty() ? 0.0 : layer[0];
        for (double v : layer) best = std::min(best, v);
        layer_loss.push_back(best / static_cast<double>(result.rounds));
    }

    // grid error of the top neuron against the target
    double mae = 0.0;
    const auto& top = result.fit.back()[0];
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
        mae += std::abs(top[g] - gaussian_truth(result.grid[g]));
    }
    mae /= static_cast<double>(result.grid.size());

    write_capacity_grid(dir, result);

    MetricsWriter metrics(dir, false);
    for (const auto& [t, loss] : result.curve) metrics.record(t, loss, 0.0);

    write_checkpoint(dir, "gaussian", [&](ByteWriter& w) { result.net.save(w); });

    json summary;
    summary["rounds"] = result.rounds;
    summary["top_grid_mae"] = mae;
    summary["best_layer_avg_loss"] = layer_loss;
    log_line(log, "gaussian: top-neuron grid MAE " + fmt_double(mae));
    return summary;
}

json run_gaussian_switching(const ExperimentConfig& config, const fs::path& dir,
                            const LogFn& log) {
    SwitchingDemoConfig sc;
    sc.capacity = capacity_config_from(config);
    sc.trajectory_stride = config.get_u64("trajectory_stride", 100);
    const std::uint64_t rounds = sc.capacity.rounds;
    sc.snapshots = {rounds / 4, rounds / 2, rounds};
    RandomSource rng(config.get_u64("seed", 1));
    SwitchingDemoResult result = switching_demo(sc, rng);

    {
        std::ofstream out(dir / "trajectory.csv", std::ios::trunc);
        out << "t";
        for (const auto& [layer, k] : result.model_index) out << ",u_" << layer + 1 << "_" << k;
        out << "\n";
        for (std::size_t r = 0; r < result.trajectory_t.size(); ++r) {
            out << result.trajectory_t[r];
            for (double u : result.trajectory_u[r]) out << "," << fmt_double(u);
            out << "\n";
        }
    }
    {
        std::ofstream out(dir / "grid_fit.csv", std::ios::trunc);
        out << "z,f";
        for (std::uint64_t t : result.snapshot_t) out << ",tau_t" << t;
        out << "\n";
        for (std::size_t g = 0; g < result.grid.size(); ++g) {
            out << fmt_double(result.grid[g]) << ","
                << fmt_double(gaussian_truth(result.grid[g]));
            for (const auto& fit : result.snapshot_fit) out << "," << fmt_double(fit[g]);
            out << "\n";
        }
    }

    MetricsWriter metrics(dir, false);
    for (const auto& [t, loss] : result.curve) metrics.record(t, loss, 0.0);

    write_checkpoint(dir, "gaussian-switching", [&](ByteWriter& w) {
        result.net.save(w);
        result.mixture.save(w);
    });

    double best_neuron = result.neuron_cum_loss[0];
    for (double v : result.neuron_cum_loss) best_neuron = std::min(best_neuron, v);

    json summary;
    summary["rounds"] = result.rounds;
    summary["ensemble_cum_loss"] = result.ensemble_cum_loss;
    summary["best_neuron_cum_loss"] = best_neuron;
    summary["model_count"] = result.model_index.size();
    log_line(log, "gaussian switching: ensemble loss " + fmt_double(result.ensemble_cum_loss) +
                      ", best neuron " + fmt_double(best_neuron));
    return summary;
}

json run_xor(const ExperimentConfig& config, const fs::path& dir, const LogFn& log) {
    XorConfig xc;
    xc.layers = static_cast<std::uint32_t>(config.get_u64("layers", 6));
    xc.width = static_cast<std::uint32_t>(config.get_u64("width", 2));
    xc.rounds = config.get_u64("rounds", 200000);
    xc.eps = config.get_double("eps", 0.01);
    xc.weight_bound = config.get_double("weight_bound", 5.0);
    xc.lr = config.get_schedule("lr", "capped:40:0.4");
    xc.grid_points = static_cast<std::uint32_t>(config.get_u64("grid_points", 41));
    RandomSource rng(config.get_u64("seed", 1));
    XorResult result = xor_demo(xc, rng);

    double worst = 0.0;
    {
        std::ofstream out(dir / "grid_fit.csv", std::ios::trunc);
        out << "x,y,f";
        for (std::size_t j = 0; j < result.deep_fit.size(); ++j) out << ",deep_" << j;
        out << "\n";
        for (std::uint32_t gy = 0; gy < xc.grid_points; ++gy) {
            for (std::uint32_t gx = 0; gx < xc.grid_points; ++gx) {
                const double x = result.grid[gx], y = result.grid[gy];
                out << fmt_double(x) << "," << fmt_double(y) << ","
                    << (x * y >= 0.0 ? 1 : 0);
                for (const auto& fit : result.deep_fit) {
                    const double p = fit[gy * xc.grid_points + gx];
                    worst = std::max(worst, std::abs(p - 0.5));
                    out << "," << fmt_double(p);
                }
                out << "\n";
            }
        }
    }

    MetricsWriter metrics(dir, false);
    for (const auto& [t, loss] : result.curve) metrics.record(t, loss, 0.0);
    write_checkpoint(dir, "xor", [&](ByteWriter& w) { result.net.save(w); });

    json summary;
    summary["rounds"] = result.rounds;
    summary["deep_max_deviation_from_half"] = worst;
    log_line(log, "xor: max deep-layer deviation from 1/2 is " + fmt_double(worst));
    return summary;
}

// ---------------------------------------------------------------------------
// spiral
// ---------------------------------------------------------------------------

NetworkSpec spiral_network_spec(const ExperimentConfig& config) {
    NetworkSpec spec;
    spec.base_width = 2;
    spec.widths = config.get_widths("widths", "50-25-1");
    spec.side_dim = 2;
    spec.eps = config.get_double("eps", 0.01);
    spec.weight_bound = config.get_double("weight_bound", 200.0);
    spec.init = InitScheme::Zero;
    spec.lr = config.get_schedule("lr", "constant:0.01");
    spec.contexts = {ContextSource::halfspace_gaussian(
        static_cast<std::uint32_t>(config.get_u64("context_bits", 1)),
        config.get_double("context_sigma_v", 6.0), config.get_double("context_sigma_b", 3.0))};
    return spec;
}

json run_spiral(const ExperimentConfig& config, const fs::path& dir, const LogFn& log) {
    SpiralParams params;
    params.per_class = static_cast<std::uint32_t>(config.get_u64("per_class", 1000));
    params.r_max = config.get_double("r_max", 3.0);
    params.theta_span = config.get_double("theta_span", params.theta_span);
    params.noise = config.get_double("noise", 0.1);

    RandomSource rng(config.get_u64("seed", 1));
    RandomSource data_rng = rng.derive(100);
    RandomSource net_rng = rng.derive(200);
    const auto examples = spiral_dataset(params, data_rng);

    OneVsAllClassifier clf(params.classes, spiral_network_spec(config), false, net_rng);

    MetricsWriter metrics(dir, true);
    const std::uint64_t block = config.get_u64("metrics_block", 250);
    std::uint64_t correct = 0, block_correct = 0;
    double block_loss = 0.0;
    for (std::size_t t = 0; t < examples.size(); ++t) {
        const auto result = clf.step(examples[t].features, examples[t].label, true, t + 1);
        double loss = 0.0;
        for (double l : result.losses) loss += l;
        block_loss += loss;
        if (result.predicted == examples[t].label) {
            ++correct;
            ++block_correct;
        }
        if ((t + 1) % block == 0 || t + 1 == examples.size()) {
            const std::uint64_t n = (t + 1) % block == 0 ? block : (t + 1) % block;
            metrics.record(t + 1, block_loss / n, static_cast<double>(block_correct) / n);
            block_loss = 0.0;
            block_correct = 0;
        }
    }
    const double online_accuracy = static_cast<double>(correct) / examples.size();

    // frozen accuracy over the training set
    std::uint64_t frozen_correct = 0;
    for (const auto& ex : examples) {
        if (clf.predict_label(ex.features) == ex.label) ++frozen_correct;
    }
    const double train_accuracy = static_cast<double>(frozen_correct) / examples.size();

    // per-layer best-neuron accuracy against the nearest-arc oracle
    const std::uint32_t grid_n = static_cast<std::uint32_t>(config.get_u64("grid_points", 81));
    const double extent = params.r_max * 1.05;
    std::vector<ForwardTrace> traces;
    const std::uint32_t layer_count =
        static_cast<std::uint32_t>(spiral_network_spec(config).widths.size());
    std::vector<std::vector<std::uint64_t>> layer_hits(layer_count);
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        layer_hits[l].assign(spiral_network_spec(config).widths[l], 0);
    }
    std::uint64_t grid_total = 0;
    for (std::uint32_t gy = 0; gy < grid_n; ++gy) {
        for (std::uint32_t gx = 0; gx < grid_n; ++gx) {
            const double x = -extent + 2.0 * extent * gx / (grid_n - 1);
            const double y = -extent + 2.0 * extent * gy / (grid_n - 1);
            const std::uint32_t truth = spiral_nearest_arc(params, x, y);
            const double point[2] = {x, y};
            clf.traces(point, traces);
            ++grid_total;
            for (std::uint32_t l = 0; l < layer_count; ++l) {
                for (std::uint32_t j = 0; j < layer_hits[l].size(); ++j) {
                    std::uint32_t argmax = 0;
                    double best = -1.0;
                    for (std::uint32_t c = 0; c < params.classes; ++c) {
                        const double p = sigmoid(traces[c].preact[l][j]);
                        if (p > best) {
                            best = p;
                            argmax = c;
                        }
                    }
                    if (argmax == truth) ++layer_hits[l][j];
                }
            }
        }
    }
    json layer_accuracy = json::array();
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        std::uint64_t best = 0;
        for (auto hits : layer_hits[l]) best = std::max(best, hits);
        layer_accuracy.push_back(static_cast<double>(best) / grid_total);
    }

    write_checkpoint(dir, "spiral", [&](ByteWriter& w) { clf.save(w); });

    json summary;
    summary["examples"] = examples.size();
    summary["online_accuracy"] = online_accuracy;
    summary["train_accuracy"] = train_accuracy;
    summary["layer_accuracy"] = layer_accuracy;
    log_line(log, "spiral: online acc " + fmt_double(online_accuracy) + ", frozen train acc " +
                      fmt_double(train_accuracy));
    return summary;
}

// ---------------------------------------------------------------------------
// mnist classification
// ---------------------------------------------------------------------------

json run_mnist_classify(const ExperimentConfig& config, const fs::path& dir, const LogFn& log) {
    const MnistData data =
        load_mnist(config, config.get_u64("limit", 0), config.get_u64("test_limit", 0));
    const bool deskew_on = config.get_bool("deskew", true);
    const std::uint32_t pixels = data.rows * data.cols;

    NetworkSpec spec;
    spec.base_width = pixels;
    spec.widths = config.get_widths("widths", "128-128-1");
    spec.side_dim = pixels;
    spec.eps = config.get_double("eps", 0.01);
    spec.weight_bound = config.get_double("weight_bound", 200.0);
    spec.init = InitScheme::Zero;
    spec.lr = config.get_schedule("lr", "capped:400:0.08");
    spec.contexts = {ContextSource::halfspace_gaussian(
        static_cast<std::uint32_t>(config.get_u64("context_bits", 4)),
        config.get_double("context_sigma_v", 0.1), config.get_double("context_sigma_b", 0.0))};

    RandomSource rng(config.get_u64("seed", 1));
    RandomSource net_rng = rng.derive(200);
    OneVsAllClassifier clf(10, spec, true, net_rng);

    auto prepare = [&](const std::vector<double>& image) {
        return deskew_on ? deskew(image, data.rows, data.cols) : image;
    };

    MetricsWriter metrics(dir, true);
    const std::uint64_t block = config.get_u64("metrics_block", 1000);
    std::uint64_t correct = 0, block_correct = 0;
    double block_loss = 0.0;
    for (std::size_t t = 0; t < data.train_images.size(); ++t) {
        const auto features = prepare(data.train_images[t]);
        const auto result = clf.step(features, data.train_labels[t], true, t + 1);
        double loss = 0.0;
        for (double l : result.losses) loss += l;
        block_loss += loss;
        if (result.predicted == data.train_labels[t]) {
            ++correct;
            ++block_correct;
        }
        if ((t + 1) % block == 0 || t + 1 == data.train_images.size()) {
            const std::uint64_t n = (t + 1) % block == 0 ? block : (t + 1) % block;
            metrics.record(t + 1, block_loss / n, static_cast<double>(block_correct) / n);
            block_loss = 0.0;
            block_correct = 0;
            log_line(log, "train " + std::to_string(t + 1) + "/" +
                              std::to_string(data.train_images.size()) + " online acc " +
                              fmt_double(static_cast<double>(correct) / (t + 1)));
        }
    }

    std::uint64_t test_correct = 0;
    for (std::size_t t = 0; t < data.test_images.size(); ++t) {
        const auto features = prepare(data.test_images[t]);
        if (clf.predict_label(features) == data.test_labels[t]) ++test_correct;
    }
    const double test_accuracy =
        data.test_images.empty() ? 0.0
                                 : static_cast<double>(test_correct) / data.test_images.size();

    write_checkpoint(dir, "mnist-classify", [&](ByteWriter& w) { clf.save(w); });

    json summary;
    summary["train_examples"] = data.train_images.size();
    summary["test_examples"] = data.test_images.size();
    summary["online_accuracy"] =
        static_cast<double>(correct) / std::max<std::size_t>(1, data.train_images.size());
    summary["test_accuracy"] = test_accuracy;
    summary["deskew"] = deskew_on;
    log_line(log, "mnist-classify: frozen test accuracy " + fmt_double(test_accuracy));
    return summary;
}

// ---------------------------------------------------------------------------
// mnist density
// ---------------------------------------------------------------------------

json run_mnist_density(const ExperimentConfig& config, const fs::path& dir, const LogFn& log) {
    const MnistData data =
        load_mnist(config, config.get_u64("limit", 0), config.get_u64("test_limit", 0));
    const std::uint8_t threshold =
        static_cast<std::uint8_t>(config.get_u64("binarize_threshold", 128));
    const std::uint32_t pixels = data.rows * data.cols;

    DensitySpec spec;
    spec.rows = data.rows;
    spec.cols = data.cols;
    spec.widths = config.get_widths("widths", "8-16-8-16");
    spec.eps = config.get_double("eps", 1e-4);
    spec.weight_bound = config.get_double("weight_bound", 200.0);
    spec.lr = config.get_schedule("lr", "capped:25:0.005");
    spec.skipgram_models = static_cast<std::uint32_t>(config.get_u64("skipgram_models", 50));
    spec.use_switching = config.get_bool("switching", true);

    RandomSource rng(config.get_u64("seed", 1));
    RandomSource model_rng = rng.derive(300);
    AutoregressiveDensityModel model(spec, model_rng);
    IndependentZRBaseline baseline(pixels);

    // one contiguous stream: training images, then the test segment, with
    // learning left on throughout
    MetricsWriter metrics(dir, false);
    const std::uint64_t block = config.get_u64("metrics_block", 1000);
    const std::size_t train_count = data.train_images.size();
    const std::size_t total = train_count + data.test_images.size();

    auto image_at = [&](std::size_t t) -> const std::vector<double>& {
        return t < train_count ? data.train_images[t] : data.test_images[t - train_count];
    };

    double train_nats = 0.0, test_nats = 0.0;
    double zr_train_nats = 0.0, zr_test_nats = 0.0;
    double block_nats = 0.0;
    std::vector<std::uint8_t> raw(pixels);
    json train_blocks = json::array();
    double segment_nats = 0.0;
    std::uint64_t segment_count = 0;
    const std::uint64_t segment_size = config.get_u64("summary_block", 10000);

    for (std::size_t t = 0; t < total; ++t) {
        const auto& image = image_at(t);
        for (std::uint32_t p = 0; p < pixels; ++p) {
            raw[p] = static_cast<std::uint8_t>(image[p] * 255.0 + 0.5);
        }
        const auto bits = binarize(raw, threshold);
        const double nats = model.step(bits, true);
        const double zr_nats = baseline.step(bits, true);
        block_nats += nats;
        if (t < train_count) {
            train_nats += nats;
            zr_train_nats += zr_nats;
            segment_nats += nats;
            if (++segment_count == segment_size || t + 1 == train_count) {
                train_blocks.push_back(segment_nats / segment_count);
                segment_nats = 0.0;
                segment_count = 0;
            }
        } else {
            test_nats += nats;
            zr_test_nats += zr_nats;
        }
        if ((t + 1) % block == 0 || t + 1 == total) {
            const std::uint64_t n = (t + 1) % block == 0 ? block : (t + 1) % block;
            metrics.record(t + 1, block_nats / n, 0.0);
            block_nats = 0.0;
            log_line(log, "density " + std::to_string(t + 1) + "/" + std::to_string(total));
        }
    }

    if (config.get_bool("checkpoint", true)) {
        write_checkpoint(dir, "mnist-density", [&](ByteWriter& w) {
            model.save(w);
            baseline.save(w);
        });
    }

    const double test_count = std::max<std::size_t>(1, data.test_images.size());
    json summary;
    summary["train_examples"] = train_count;
    summary["test_examples"] = data.test_images.size();
    summary["train_avg_nats"] = train_nats / std::max<std::size_t>(1, train_count);
    summary["test_avg_nats"] = test_nats / test_count;
    summary["zr_baseline_train_avg_nats"] = zr_train_nats / std::max<std::size_t>(1, train_count);
    summary["zr_baseline_test_avg_nats"] = zr_test_nats / test_count;
    summary["train_block_avg_nats"] = train_blocks;
    log_line(log, "mnist-density: test segment " + fmt_double(test_nats / test_count) +
                      " nats/image vs ZR baseline " + fmt_double(zr_test_nats / test_count));
    return summary;
}

}  // namespace

void run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                    const LogFn& log) {
    const std::string experiment = config.get("experiment");
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    {
        std::ofstream cfg(dir / "config.txt", std::ios::trunc);
        cfg << config.serialize();
    }

    RunTimer timer;
    json summary;
    if (experiment == "gaussian") {
        summary = config.get_bool("switching", false) ? run_gaussian_switching(config, dir, log)
                                                      : run_gaussian_capacity(config, dir, log);
    } else if (experiment == "xor") {
        summary = run_xor(config, dir, log);
    } else if (experiment == "spiral") {
        summary = run_spiral(config, dir, log);
    } else if (experiment == "mnist-classify") {
        summary = run_mnist_classify(config, dir, log);
    } else if (experiment == "mnist-density") {
        summary = run_mnist_density(config, dir, log);
    } else {
        throw ConfigError("unknown experiment: " + experiment);
    }
    write_metadata(dir, config, summary, timer.seconds());
}

// ---------------------------------------------------------------------------
// Plot data emission
// ---------------------------------------------------------------------------

namespace {

std::string checkpoint_experiment(ByteReader& r) {
    if (r.u32() != 0x474C4E43u) throw std::runtime_error("checkpoint: bad magic");
    if (r.u32() != 1) throw std::runtime_error("checkpoint: unsupported version");
    return r.str();
}

void emit_gaussian_plot(const fs::path& dir, bool switching) {
    ByteReader r(read_file((dir / "checkpoint.gln").string()));
    const std::string kind = checkpoint_experiment(r);
    GatedLinearNetwork net = GatedLinearNetwork::load(r);
    SwitchingMixture mixture;
    if (switching) mixture = SwitchingMixture::load(r);

    std::ofstream out(dir / "plot_grid.txt", std::ios::trunc);
    out << "# z  f(z)";
    for (std::uint32_t i = 0; i < net.layers(); ++i) {
        for (std::uint32_t j = 0; j < net.width(i); ++j) out << "  p_" << i + 1 << "_" << j;
    }
    if (switching) out << "  tau";
    out << "\n";

    const double base[1] = {0.5};
    ForwardTrace trace;
    std::vector<double> preds;
    for (int g = 0; g < 601; ++g) {
        const double z = -3.0 + 6.0 * g / 600.0;
        const double zvec[1] = {z};
        net.forward(base, zvec, trace);
        out << fmt_double(z) << " " << fmt_double(gaussian_truth(z));
        preds.clear();
        for (std::uint32_t i = 0; i < net.layers(); ++i) {
            for (std::uint32_t j = 0; j < net.width(i); ++j) {
                out << " " << fmt_double(sigmoid(trace.preact[i][j]));
                preds.push_back(trace.clipped[i][j]);
            }
        }
        if (switching) out << " " << fmt_double(mixture.predict(preds));
        out << "\n";
    }
}

void emit_trajectory_plot(const fs::path& dir) {
    std::ifstream in(dir / "trajectory.csv");
    if (!in) throw std::runtime_error("missing run artifact: trajectory.csv");
    std::ofstream out(dir / "plot_trajectory.txt", std::ios::trunc);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        for (auto& ch : line) {
            if (ch == ',') ch = ' ';
        }
        out << (header ? "# " : "") << line << "\n";
        header = false;
    }
}

void emit_xor_plot(const fs::path& dir) {
    ByteReader r(read_file((dir / "checkpoint.gln").string()));
    checkpoint_experiment(r);
    GatedLinearNetwork net = GatedLinearNetwork::load(r);

    std::ofstream out(dir / "plot_grid.txt", std::ios::trunc);
    out << "# x  y  f(z)";
    const std::uint32_t deep = net.layers() - 1;
    for (std::uint32_t j = 0; j < net.width(deep); ++j) out << "  deep_" << j;
    out << "\n";
    const double base[1] = {0.5};
    ForwardTrace trace;
    for (int gy = 0; gy < 41; ++gy) {
        for (int gx = 0; gx < 41; ++gx) {
            const double x = -1.0 + 2.0 * gx / 40.0;
            const double y = -1.0 + 2.0 * gy / 40.0;
            const double z[2] = {x, y};
            net.forward(base, z, trace);
            out << fmt_double(x) << " " << fmt_double(y) << " " << (x * y >= 0.0 ? 1 : 0);
            for (std::uint32_t j = 0; j < net.width(deep); ++j) {
                out << " " << fmt_double(sigmoid(trace.preact[deep][j]));
            }
            out << "\n";
        }
    }
}

void emit_spiral_plot(const fs::path& dir, const ExperimentConfig& config) {
    ByteReader r(read_file((dir / "checkpoint.gln").string()));
    checkpoint_experiment(r);
    OneVsAllClassifier clf = OneVsAllClassifier::load(r);

    SpiralParams params;
    params.per_class = static_cast<std::uint32_t>(config.get_u64("per_class", 1000));
    params.r_max = config.get_double("r_max", 3.0);
    params.theta_span = config.get_double("theta_span", params.theta_span);
    params.noise = config.get_double("noise", 0.1);

    std::ofstream out(dir / "plot_decision.txt", std::ios::trunc);
    out << "# x  y  true  predicted\n";
    const double extent = params.r_max * 1.05;
    for (int gy = 0; gy < 81; ++gy) {
        for (int gx = 0; gx < 81; ++gx) {
            const double x = -extent + 2.0 * extent * gx / 80.0;
            const double y = -extent + 2.0 * extent * gy / 80.0;
            const double point[2] = {x, y};
            out << fmt_double(x) << " " << fmt_double(y) << " "
                << spiral_nearest_arc(params, x, y) << " " << clf.predict_label(point) << "\n";
        }
    }
}

void emit_curve_plot(const fs::path& dir) {
    std::ifstream in(dir / "metrics.csv");
    if (!in) throw std::runtime_error("missing run artifact: metrics.csv");
    std::ofstream out(dir / "plot_curve.txt", std::ios::trunc);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        for (auto& ch : line) {
            if (ch == ',') ch = ' ';
        }
        out << (header ? "# " : "") << line << "\n";
        header = false;
    }
}

}  // namespace

void emit_plotdata(const std::string& run_dir, const LogFn& log) {
    const fs::path dir(run_dir);
    if (!fs::exists(dir / "config.txt")) {
        throw std::runtime_error("not a run directory (missing config.txt): " + run_dir);
    }
    const ExperimentConfig config = ExperimentConfig::parse_file((dir / "config.txt").string());
    const std::string experiment = config.get("experiment");
    if (experiment == "gaussian") {
        const bool switching = config.get_bool("switching", false);
        emit_gaussian_plot(dir, switching);
        if (switching) emit_trajectory_plot(dir);
        log_line(log, "wrote plot_grid.txt" + std::string(switching ? " and plot_trajectory.txt" : ""));
    } else if (experiment == "xor") {
        emit_xor_plot(dir);
        log_line(log, "wrote plot_grid.txt");
    } else if (experiment == "spiral") {
        emit_spiral_plot(dir, config);
        log_line(log, "wrote plot_decision.txt");
    } else if (experiment == "mnist-classify" || experiment == "mnist-density") {
        emit_curve_plot(dir);
        log_line(log, "wrote plot_curve.txt");
    } else {
        throw ConfigError("unknown experiment: " + experiment);
    }
}

}  // namespace gln
