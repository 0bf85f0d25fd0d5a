#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "sbki/dataset.hpp"
#include "sbki/metrics.hpp"
#include "sbki/ply.hpp"

using namespace sbki;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string env_name(const std::string& flag) {
    std::string name = "SBKI_";
    for (char c : flag) {
        if (c == '-') name += '_';
        else name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return name;
}

// Registers --flag with a matching SBKI_FLAG environment override.
template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
    return app->add_option("--" + name, value, help)->envname(env_name(name))->capture_default_str();
}

struct MapFlags {
    MapConfig cfg;
    std::string mode = "bki";
    std::optional<unsigned> block_depth;
    std::optional<double> variance_threshold;
    std::string training_region = "kernel-support";

    void attach(CLI::App* app) {
        cfg.thread_count = std::max(1u, std::thread::hardware_concurrency());
        flag(app, "resolution", cfg.resolution, "Voxel edge length [m]");
        flag(app, "block-depth", block_depth, "Octree depth per block (default 3 for bki, 1 for csm)");
        flag(app, "num-classes", cfg.num_classes, "Number of classes K including free (class 0)");
        flag(app, "mode", mode, "Inference model")->check(CLI::IsMember({"csm", "bki"}));
        flag(app, "l", cfg.kernel.length_scale, "Kernel length-scale [m]");
        flag(app, "sigma0", cfg.kernel.signal_scale, "Kernel signal scale");
        flag(app, "prior", cfg.prior, "Dirichlet prior concentration per class");
        attach_thresholds(app);
        flag(app, "spacing", cfg.spacing, "Free-space sample spacing [m]; 0 picks the mode default");
        flag(app, "max-range", cfg.max_range, "Beams are cut at this range [m]");
        flag(app, "min-range", cfg.min_range, "Hits closer than this are dropped [m]");
        flag(app, "ds-resolution", cfg.ds_resolution, "Hit downsampling voxel [m]; 0 disables");
        flag(app, "threads", cfg.thread_count, "Worker threads")->check(CLI::PositiveNumber);
        flag(app, "training-region", training_region, "Training data gathered per block")
            ->check(CLI::IsMember({"kernel-support", "extended-block"}));
    }

    void attach_thresholds(CLI::App* app) {
        flag(app, "free-thresh", cfg.free_thresh, "Occupancy below this is free");
        flag(app, "occ-thresh", cfg.occ_thresh, "Occupancy above this is occupied");
        flag(app, "evidence-threshold", cfg.evidence_threshold,
             "Minimum evidence, in single-measurement units, before a cell is classified");
        flag(app, "variance-threshold", variance_threshold,
             "Cells whose argmax-class variance exceeds this are unknown");
    }

    MapConfig resolve() const {
        MapConfig out = cfg;
        const MapConfig mode_defaults = MapConfig::defaults_for(parse_mode(mode));
        out.mode = mode_defaults.mode;
        out.block_depth = block_depth ? *block_depth : mode_defaults.block_depth;
        out.variance_threshold = variance_threshold;
        out.training_region = training_region == "extended-block" ? TrainingRegion::extended_block
                                                                  : TrainingRegion::kernel_support;
        out.validate();
        return out;
    }

    // Runtime settings for maps loaded from file; geometry comes from the file header.
    MapConfig thresholds() const {
        MapConfig out;
        out.free_thresh = cfg.free_thresh;
        out.occ_thresh = cfg.occ_thresh;
        out.evidence_threshold = cfg.evidence_threshold;
        out.variance_threshold = variance_threshold;
        return out;
    }
};

std::string join(std::span<const double> v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_double(v[i]);
    }
    return out;
}

// Reads key=value lines into "--key value" tokens, skipping keys already set through the
// environment so that the command line wins over the environment, which wins over the file.
std::vector<std::string> config_tokens(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        for (char& c : key) if (c == '_') c = '-';
        if (key.empty()) throw UsageError(path.string() + ":" + std::to_string(n) + ": empty key");
        if (std::getenv(env_name(key).c_str())) continue;
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    return tokens;
}

// Moves "--config FILE" (or SBKI_CONFIG) contents right after the subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::optional<std::string> file;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
            file = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!file) {
        if (const char* env = std::getenv("SBKI_CONFIG")) file = env;
    }
    if (!file || args.size() < 2) return args;
    const auto tokens = config_tokens(*file);
    args.insert(args.begin() + 2, tokens.begin(), tokens.end());
    return args;
}

GroundTruthGrid load_truth(const std::string& gt, const std::string& data) {
    if (!gt.empty()) return read_ground_truth(gt);
    if (!data.empty()) return read_ground_truth(DatasetPaths{data}.ground_truth());
    throw UsageError("either --gt or --data is required");
}

int run_build(const MapFlags& flags, const std::string& data, const std::string& out) {
    const MapConfig cfg = flags.resolve();
    const DatasetPaths paths{data};
    const auto poses = read_pose_file(paths.poses());
    const auto scans = load_scans(paths, cfg.num_classes);
    double total = 0.0;
    const auto map = build_map(cfg, scans, [&](std::size_t i, double seconds) {
        total += seconds;
        std::printf("scan %lld: %zu hits, %.1f ms\n", static_cast<long long>(poses[i].scan_id),
                    scans[i].hits.size(), seconds * 1e3);
    });
    write_map_file(out, map);
    const double mean = scans.empty() ? 0.0 : total / static_cast<double>(scans.size());
    std::printf("built %zu scans into %zu blocks (%s mode); mean latency %.1f ms (%.2f scans/s); wrote %s\n",
                scans.size(), map.block_count(), to_string(cfg.mode), mean * 1e3,
                mean > 0.0 ? 1.0 / mean : 0.0, out.c_str());
    return 0;
}

int run_query(const MapFlags& flags, const std::string& map_file, const std::array<double, 3>& xyz) {
    const auto map = read_map_file(map_file, flags.thresholds());
    const auto stats = map.query_point(Vec3(xyz[0], xyz[1], xyz[2]));
    if (!stats) {
        std::printf("unobserved\n");
        return 0;
    }
    std::printf("mean: %s\n", join(stats->mean).c_str());
    std::printf("variance: %s\n", join(stats->variance).c_str());
    std::printf("argmax: %u\n", stats->argmax_class);
    std::printf("occupied_prob: %s\n", format_double(stats->occupied_prob).c_str());
    std::printf("state: %s\n", to_string(stats->state));
    return 0;
}

std::string iou_csv(const Evaluation& ev) {
    std::ostringstream csv;
    csv << "class,iou\n";
    for (std::size_t k = 1; k < ev.iou.per_class.size(); ++k) {
        if (!ev.iou.present[k]) continue;
        csv << k << ',' << format_double(ev.iou.per_class[k]) << '\n';
    }
    return csv.str();
}

int run_eval(const MapFlags& flags, const std::string& map_file, const std::string& gt,
             const std::string& data, const std::string& csv) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto truth = load_truth(gt, data);
    const auto map = read_map_file(map_file, flags.thresholds());
    const auto ev = evaluate_map(map, truth);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    const std::string table = iou_csv(ev);
    if (csv.empty()) std::fputs(table.c_str(), stdout);
    else write_atomic(csv, table);
    std::printf("mean_iou=%s auc=%s auc_cells=%zu runtime=%.3fs\n",
                ev.iou.mean ? format_double(*ev.iou.mean).c_str() : "nan",
                ev.auc ? format_double(*ev.auc).c_str() : "nan", ev.auc_cells, dt.count());
    return 0;
}

int run_export(const MapFlags& flags, const std::string& map_file, const std::string& what,
               const std::string& filter, const std::string& out) {
    const auto map = read_map_file(map_file, flags.thresholds());
    const auto cells = map.export_cells(parse_filter(filter));
    write_ply(out, cells, parse_color_mode(what));
    std::printf("exported %zu cells to %s\n", cells.size(), out.c_str());
    return 0;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(parse_double(item));
        } catch (const ParseError&) {
            throw UsageError("bad sweep value '" + item + "'");
        }
    }
    return out;
}

int run_sweep(const MapFlags& flags, const std::string& data, const std::string& param,
              const std::string& values_text, const std::string& out) {
    const auto values = parse_values(values_text);
    if (values.size() < 2) throw UsageError("--values needs at least two entries");
    const MapConfig base = flags.resolve();
    const DatasetPaths paths{data};
    const auto scans = load_scans(paths, base.num_classes);
    const auto truth = read_ground_truth(paths.ground_truth());
    std::ostringstream csv;
    csv << param << ",mean_iou\n";
    for (double v : values) {
        MapConfig cfg = base;
        if (param == "l") {
            cfg.kernel.length_scale = v;
            // Deepen blocks until one block spans the kernel support.
            while (cfg.mode == MapMode::bki && cfg.block_size() < v && cfg.block_depth < 8) ++cfg.block_depth;
        } else {
            cfg.kernel.signal_scale = v;
        }
        cfg.validate();
        const auto ev = evaluate_map(build_map(cfg, scans), truth);
        csv << format_double(v) << ',' << format_double(ev.iou.mean.value_or(0.0)) << '\n';
        std::fprintf(stderr, "%s=%s mean_iou=%s\n", param.c_str(), format_double(v).c_str(),
                     format_double(ev.iou.mean.value_or(0.0)).c_str());
    }
    if (out.empty()) std::fputs(csv.str().c_str(), stdout);
    else write_atomic(out, csv.str());
    return 0;
}

int run_simulate(const SimulationSpec& spec, double resolution, const std::string& out) {
    const auto data = simulate_dataset(spec);
    write_dataset(DatasetPaths{out}, data, resolution);
    std::size_t hits = 0;
    for (const auto& s : data.scans) hits += s.hits.size();
    std::printf("simulated %zu scans (%zu hits) of toy room seed %llu into %s\n", data.scans.size(), hits,
                static_cast<unsigned long long>(spec.seed), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous semantic occupancy mapping with Dirichlet counting and kernel inference"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_help;
    app.add_option("--config", config_help, "key=value file mirroring the flags (also SBKI_CONFIG)");

    MapFlags flags;
    std::string data, out, gt, csv, what = "semantic", filter = "occupied", param, values, map_file;
    std::array<double, 3> xyz{};

    auto* build = app.add_subcommand("build", "Fuse a scan dataset into a map file");
    flags.attach(build);
    flag(build, "data", data, "Dataset directory (poses.txt, scans/)")->required();
    flag(build, "out", out, "Output map file")->required();

    auto* query = app.add_subcommand("query", "Print the posterior at a point");
    query->add_option("map", map_file, "Map file")->required();
    query->add_option("xyz", xyz, "Query point x y z")->required()->expected(3);
    MapFlags query_flags;
    query_flags.attach_thresholds(query);

    auto* eval = app.add_subcommand("eval", "Score a map against ground truth");
    eval->add_option("map", map_file, "Map file")->required();
    flag(eval, "gt", gt, "Ground-truth file");
    flag(eval, "data", data, "Dataset directory holding gt.txt");
    flag(eval, "csv", csv, "Per-class IoU CSV output (stdout if omitted)");
    MapFlags eval_flags;
    eval_flags.attach_thresholds(eval);

    auto* exp = app.add_subcommand("export", "Write cells as a coloured PLY point cloud");
    exp->add_option("map", map_file, "Map file")->required();
    flag(exp, "what", what, "Colouring")->check(CLI::IsMember({"semantic", "variance", "occupancy"}));
    flag(exp, "filter", filter, "Cells to export")->check(CLI::IsMember({"all", "occupied", "free"}));
    flag(exp, "out", out, "Output PLY file")->required();
    MapFlags export_flags;
    export_flags.attach_thresholds(exp);

    auto* sweep = app.add_subcommand("sweep", "Rebuild and score a dataset over kernel parameters");
    MapFlags sweep_flags;
    sweep_flags.attach(sweep);
    flag(sweep, "data", data, "Dataset directory with gt.txt")->required();
    flag(sweep, "param", param, "Parameter to sweep")->required()->check(CLI::IsMember({"l", "sigma0"}));
    flag(sweep, "values", values, "Comma-separated values")->required();
    flag(sweep, "out", out, "CSV output (stdout if omitted)");

    auto* sim = app.add_subcommand("simulate", "Generate a toy-room dataset");
    SimulationSpec spec;
    double sim_resolution = 0.1;
    flag(sim, "seed", spec.seed, "World and noise seed");
    flag(sim, "scans", spec.scan_count, "Number of scans")->check(CLI::PositiveNumber);
    flag(sim, "noise", spec.noise_sigma, "Along-ray range noise sigma [m]")->check(CLI::NonNegativeNumber);
    flag(sim, "max-range", spec.max_range, "Sensor range [m]")->check(CLI::PositiveNumber);
    flag(sim, "resolution", sim_resolution, "Ground-truth grid resolution [m]")->check(CLI::PositiveNumber);
    flag(sim, "out", out, "Output directory")->required();

    try {
        auto args = expand_config(argc, argv);
        std::vector<char*> ptrs;
        for (auto& a : args) ptrs.push_back(a.data());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    try {
        if (*build) return run_build(flags, data, out);
        if (*query) return run_query(query_flags, map_file, xyz);
        if (*eval) return run_eval(eval_flags, map_file, gt, data, csv);
        if (*exp) return run_export(export_flags, map_file, what, filter, out);
        if (*sweep) return run_sweep(sweep_flags, data, param, values, out);
        if (*sim) return run_simulate(spec, sim_resolution, out);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
