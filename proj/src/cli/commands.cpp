#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "gess/cli.hpp"
#include "gess/dataset.hpp"
#include "gess/depth_stability.hpp"
#include "gess/gtf.hpp"
#include "gess/image_io.hpp"
#include "gess/param_manifest.hpp"
#include "gess/sdak.hpp"
#include "gess/toy_features.hpp"
#include "gess/utcf.hpp"

namespace fs = std::filesystem;

namespace gess::cli {

namespace {

const std::vector<std::string>& cue_roles() {
    static const std::vector<std::string> roles{"desc", "normal", "sem", "depth", "rel", "attn", "heat"};
    return roles;
}

// Runs fn(0..n-1) on up to `jobs` threads. Exceptions are captured per index.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct WorkItem {
    fs::path dir;  // relative to the input root
    std::string stem;
    std::map<std::string, fs::path> cues;
    std::optional<fs::path> image;
};

std::vector<WorkItem> discover(const fs::path& root) {
    std::map<std::pair<fs::path, std::string>, WorkItem> items;
    const std::set<std::string> roles(cue_roles().begin(), cue_roles().end());
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        const fs::path rel_dir = fs::relative(p.parent_path(), root);
        if (p.extension() == ".gtf") {
            const fs::path inner = p.stem();  // "<stem>.<role>"
            const std::string role = inner.extension().string().empty() ? "" : inner.extension().string().substr(1);
            if (roles.count(role) == 0) continue;
            auto& item = items[{rel_dir, inner.stem().string()}];
            item.dir = rel_dir;
            item.stem = inner.stem().string();
            item.cues[role] = p;
        } else if (image::is_image_file(p)) {
            auto& item = items[{rel_dir, p.stem().string()}];
            item.dir = rel_dir;
            item.stem = p.stem().string();
            item.image = p;
        }
    }
    std::vector<WorkItem> out;
    for (auto& [key, item] : items) out.push_back(std::move(item));
    return out;
}

Tensor read_cue(const WorkItem& item, const std::string& role) {
    const auto it = item.cues.find(role);
    if (it == item.cues.end()) {
        throw InputError(item.stem + ": missing " + role + " cue (" + item.stem + "." + role + ".gtf)");
    }
    try {
        return gtf_read(it->second);
    } catch (const GtfError& e) {
        throw InputError(it->second.string() + ": " + e.what());
    }
}

Tensor as_plane(const Tensor& t, const std::string& what) {
    if (t.rank() == 2) return t;
    if (t.rank() == 3 && t.dim(0) == 1) return t.reshaped({t.dim(1), t.dim(2)});
    throw InputError(what + ": expected [H,W] or [1,H,W], got " + shape_string(t.dims()));
}

sdak::SdakParams detection_params(const RunConfig& c) {
    sdak::SdakParams p;
    p.alpha = c.alpha;
    p.beta = c.beta;
    p.nms_radius = c.nms_radius;
    p.top_k = c.top_k;
    p.score_threshold = c.score_threshold;
    p.border_margin = c.border_margin;
    return p;
}

/// Learned weights for one image's channel layout: from the parameter
/// directory when configured, otherwise seeded uniform initialization.
struct Model {
    utcf::UtcfParams fusion;
    ConvSpec mask_conv;
};

Model load_model(const RunConfig& c, std::size_t semantic_in) {
    Model m;
    if (!c.params_dir.empty()) {
        try {
            m.fusion = utcf::load_params(c.params_dir);
            const ParamDir dir = read_param_dir(c.params_dir);
            m.mask_conv.kernel = dir.tensor("sdak.mask.kernel");
            m.mask_conv.bias = dir.tensor("sdak.mask.bias");
            m.mask_conv.padding = m.mask_conv.kernel_h() / 2;
        } catch (const std::exception& e) {
            throw InputError("parameters " + c.params_dir + ": " + e.what());
        }
    } else {
        utcf::UtcfDims dims;
        dims.channels = c.channels;
        dims.reduction = c.reduction;
        dims.semantic_in = semantic_in;
        m.fusion = utcf::UtcfParams::random(dims, c.seed);
        m.mask_conv = ConvSpec::zeros(1, semantic_in, 3, 3);
        std::mt19937_64 rng(c.seed ^ 0x5eedULL);
        const double bound = 1.0 / std::sqrt(static_cast<double>(semantic_in * 9));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (auto& v : m.mask_conv.kernel.data()) v = static_cast<float>(u(rng));
        for (auto& v : m.mask_conv.bias.data()) v = static_cast<float>(u(rng));
    }
    m.fusion.mu = c.mu;
    return m;
}

// Keypoints live in heatmap pixels; the descriptor map may be coarser.
sdak::DescriptorSet sample_at_heatmap_scale(const Tensor& desc, const std::vector<sdak::Keypoint>& kps,
                                            std::size_t heat_h, std::size_t heat_w) {
    auto scale = [](std::size_t to, std::size_t from) {
        return from > 1 ? static_cast<double>(to - 1) / static_cast<double>(from - 1) : 0.0;
    };
    const double sx = scale(desc.dim(2), heat_w);
    const double sy = scale(desc.dim(1), heat_h);
    std::vector<sdak::Keypoint> mapped = kps;
    for (auto& k : mapped) {
        k.x *= sx;
        k.y *= sy;
    }
    sdak::DescriptorSet out = sdak::sample_descriptors(desc, mapped);
    out.keypoints = kps;
    return out;
}

sdak::FeatureFile cue_pipeline(const WorkItem& item, const RunConfig& c) {
    // Resolve every role first so a missing one is reported before any work.
    for (const char* role : {"desc", "normal", "sem", "attn", "heat"}) {
        if (item.cues.count(role) == 0) read_cue(item, role);
    }
    if (item.cues.count("rel") == 0 && item.cues.count("depth") == 0) read_cue(item, "depth");

    utcf::CueBundle bundle;
    bundle.texture = read_cue(item, "desc");
    bundle.normal_raw = read_cue(item, "normal");
    bundle.semantic_raw = read_cue(item, "sem");
    bundle.attention = as_plane(read_cue(item, "attn"), item.stem + ".attn");
    const Tensor heat = as_plane(read_cue(item, "heat"), item.stem + ".heat");
    const Tensor reliability = item.cues.count("rel")
                                   ? as_plane(read_cue(item, "rel"), item.stem + ".rel")
                                   : stability::depth_to_reliability(
                                         as_plane(read_cue(item, "depth"), item.stem + ".depth"), c.stability);

    try {
        bundle.validate();
        if (bundle.semantic_raw.rank() != 3) throw ShapeError("sem cue must be [Cs,H,W]");
        const Model model = load_model(c, bundle.semantic_raw.dim(0));
        const Tensor fused = utcf::utcf_forward(bundle, model.fusion);

        sdak::SdakParams p = detection_params(c);
        p.mask_conv = model.mask_conv;
        Tensor mask = sdak::semantic_mask(bundle.semantic_raw, p);
        if (mask.dims() != heat.dims()) {
            mask = bilinear_resample(mask.reshaped({1, mask.dim(0), mask.dim(1)}), heat.dim(0), heat.dim(1))
                       .reshaped(heat.dims());
        }
        const Tensor final_heat = sdak::reweight(heat, mask, reliability, p);
        const auto kps = sdak::extract_keypoints(final_heat, p);

        sdak::FeatureFile f;
        f.features = sample_at_heatmap_scale(fused, kps, heat.dim(0), heat.dim(1));
        f.features.dim = fused.dim(0);
        f.image_height = heat.dim(0);
        f.image_width = heat.dim(1);
        return f;
    } catch (const InputError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw InputError(item.stem + ": " + e.what());
    }
}

sdak::FeatureFile toy_pipeline(const WorkItem& item, const RunConfig& c) {
    Tensor luma;
    try {
        luma = image::read_luma(*item.image);
    } catch (const std::exception& e) {
        throw InputError(item.image->string() + ": " + e.what());
    }
    eval::ToyParams tp;
    tp.patch_radius = c.patch_radius;
    tp.relative_threshold = c.relative_threshold;
    tp.detection = detection_params(c);
    return eval::toy_features(luma, tp);
}

struct ItemOutcome {
    std::string log;
    std::string error;
    int code = kExitOk;
};

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

int cmd_extract(const RunConfig& config, const fs::path& input, const fs::path& out_dir, Streams io) {
    if (!fs::is_directory(input)) {
        io.err << "error: input directory " << input.string() << " not found\n";
        return kExitInputError;
    }
    const std::vector<WorkItem> items = discover(input);
    if (items.empty()) {
        io.err << "error: no cue files or images under " << input.string() << "\n";
        return kExitInputError;
    }
    std::vector<ItemOutcome> outcomes(items.size());
    parallel_for(items.size(), config.jobs, [&](std::size_t i) {
        const WorkItem& item = items[i];
        ItemOutcome& o = outcomes[i];
        const fs::path target = out_dir / item.dir / (item.stem + eval::kFeatureExtension);
        try {
            const bool cues = !item.cues.empty();
            const sdak::FeatureFile f = cues ? cue_pipeline(item, config) : toy_pipeline(item, config);
            fs::create_directories(target.parent_path());
            sdak::write_features(f, target);
            o.log = (item.dir / item.stem).generic_string() + ": " + std::to_string(f.features.size()) +
                    " keypoints (" + (cues ? "cues" : "toy") + ") -> " + target.generic_string();
        } catch (const InputError& e) {
            o.error = e.what();
            o.code = kExitInputError;
        } catch (const std::exception& e) {
            o.error = (item.dir / item.stem).generic_string() + ": " + e.what();
            o.code = kExitInputError;
        }
    });
    int code = kExitOk;
    for (const auto& o : outcomes) {
        if (!o.log.empty()) io.out << o.log << "\n";
        if (!o.error.empty()) io.err << "error: " << o.error << "\n";
        if (code == kExitOk) code = o.code;
    }
    return code;
}

int cmd_eval(const RunConfig& config, const fs::path& dataset_root, const fs::path& features_dir,
             const fs::path& out_dir, std::optional<eval::ReportFormat> format, Streams io) {
    const bool both_formats = !format.has_value();
    eval::DatasetScan scan;
    try {
        scan = eval::load_sequences(dataset_root);
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    struct PairOutcome {
        std::optional<eval::PairResult> result;
        std::string warning;
        std::string error;
    };
    std::vector<PairOutcome> outcomes(scan.pairs.size());
    parallel_for(scan.pairs.size(), config.jobs, [&](std::size_t i) {
        const auto& pair = scan.pairs[i];
        PairOutcome& o = outcomes[i];
        const fs::path ref = eval::feature_path(features_dir, pair.sequence, pair.reference_id);
        const fs::path tgt = eval::feature_path(features_dir, pair.sequence, pair.target_id);
        for (const auto& p : {ref, tgt}) {
            if (!fs::exists(p)) {
                o.warning = pair.sequence + " pair " + std::to_string(pair.pair_index) + ": missing features " +
                            p.generic_string() + ", pair skipped";
                return;
            }
        }
        try {
            const auto a = sdak::read_features(ref);
            const auto b = sdak::read_features(tgt);
            o.result = eval::evaluate_pair(pair, a.features, b.features, config.mutual);
        } catch (const std::exception& e) {
            o.error = pair.sequence + " pair " + std::to_string(pair.pair_index) + ": " + e.what();
        }
    });

    std::vector<eval::PairResult> results;
    std::vector<std::string> warnings = scan.warnings;
    for (auto& o : outcomes) {
        if (!o.error.empty()) {
            io.err << "error: " << o.error << "\n";
            return kExitInputError;
        }
        if (!o.warning.empty()) warnings.push_back(o.warning);
        if (o.result) results.push_back(std::move(*o.result));
    }
    for (const auto& w : warnings) io.err << "warning: " << w << "\n";

    eval::ReportMetadata meta{dataset_root.generic_string(), config_hash(config), kToolVersion,
                              config.mutual ? "mutual" : "one-way"};
    const eval::EvalReport report = eval::make_report(meta, std::move(results), warnings, config.auc_thresholds);

    auto write = [&](const fs::path& path, const std::string& bytes) {
        std::ofstream os(path, std::ios::binary);
        os << bytes;
        if (!os) throw std::runtime_error("cannot write " + path.string());
    };
    try {
        fs::create_directories(out_dir);
        if (both_formats || format == eval::ReportFormat::json) {
            write(out_dir / "report.json", eval::emit_report(report, eval::ReportFormat::json));
        }
        if (both_formats || format == eval::ReportFormat::csv) {
            write(out_dir / "report.csv", eval::emit_report(report, eval::ReportFormat::csv));
        }
        write(out_dir / "plot.csv", eval::emit_plot_data(report));
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    io.out << "pairs " << report.aggregate.pair_count << ", matches " << report.aggregate.total_matches
           << ", MMA@3 " << eval::format_fixed(report.aggregate.mma3) << "\n";
    if (report.aggregate.pair_count == 0) {
        io.err << "error: no pair could be evaluated\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_gen_stability(const RunConfig& config, const fs::path& depth_file, const fs::path& out, Streams io) {
    Tensor depth;
    try {
        depth = as_plane(gtf_read(depth_file), depth_file.string());
    } catch (const std::exception& e) {
        io.err << "error: " << depth_file.string() << ": " << e.what() << "\n";
        return kExitInputError;
    }
    const Tensor rel = stability::depth_to_reliability(depth, config.stability);

    fs::path target = out;
    if (out.extension() != ".gtf") {
        std::string stem = depth_file.stem().string();
        if (fs::path(stem).extension() == ".depth") stem = fs::path(stem).stem().string();
        target = out / (stem + ".rel.gtf");
    }
    try {
        if (target.has_parent_path()) fs::create_directories(target.parent_path());
        gtf_write(rel, target);
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    const auto [lo, hi] = std::minmax_element(rel.values().begin(), rel.values().end());
    double sum = 0.0;
    for (float v : rel.values()) sum += v;
    io.out << target.generic_string() << ": min " << fixed6(*lo) << " mean "
           << fixed6(sum / static_cast<double>(rel.size())) << " max " << fixed6(*hi) << "\n";
    return kExitOk;
}

}  // namespace gess::cli
