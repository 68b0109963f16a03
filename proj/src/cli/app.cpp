#include <CLI11.hpp>
#include <iostream>

#include "gess/cli.hpp"

namespace gess::cli {

int run(int argc, char** argv) {
    CLI::App app{"Multi-cue local feature toolkit: extraction, stability targets, matching evaluation."};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::size_t jobs = 0;
    std::string format;
    app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_override, "output directory (or .gtf file for gen-stability)");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "report format written by eval")->check(CLI::IsMember({"json", "csv"}));

    std::string input_dir;
    auto* extract = app.add_subcommand("extract", "cue maps or images -> keypoint/descriptor files");
    extract->add_option("input", input_dir, "directory of cue GTF files and/or images")->required();

    std::string dataset_root;
    std::string features_dir;
    auto* evaluate = app.add_subcommand("eval", "homography-based matching evaluation");
    evaluate->add_option("dataset", dataset_root, "sequence root")->required();
    evaluate->add_option("features", features_dir, "feature root, <seq>/<id>.feat")->required();

    std::string depth_file;
    auto* gen = app.add_subcommand("gen-stability", "depth GTF -> reliability GTF");
    gen->add_option("depth", depth_file, "depth GTF file")->required();

    VerifyOptions verify_options;
    auto* verify = app.add_subcommand("verify", "run the seeded oracle suite");
    verify->add_flag("--inject-fault", verify_options.inject_fault, "corrupt one conv weight (negative control)");

    for (auto* sub : {extract, evaluate, gen, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    RunConfig config;
    try {
        if (!config_path.empty()) config = load_config(config_path);
        if (jobs > 0) config.jobs = jobs;
        if (!out_override.empty()) config.output_dir = out_override;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    Streams io{std::cout, std::cerr};
    if (*extract) return cmd_extract(config, input_dir, config.output_dir, io);
    if (*evaluate) {
        std::optional<eval::ReportFormat> fmt;
        if (format == "json") fmt = eval::ReportFormat::json;
        if (format == "csv") fmt = eval::ReportFormat::csv;
        return cmd_eval(config, dataset_root, features_dir, config.output_dir, fmt, io);
    }
    if (*gen) return cmd_gen_stability(config, depth_file, config.output_dir, io);
    return cmd_verify(config, verify_options, io);
}

}  // namespace gess::cli
