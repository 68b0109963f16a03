#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "gess/config.hpp"
#include "gess/report.hpp"

namespace gess::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,     // verification or metric failure
    kExitInputError = 2,  // unreadable, missing or malformed input
};

inline constexpr const char* kToolVersion = "gess 0.1.0";

/// Raised for problems with user-supplied inputs; maps to kExitInputError.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

int cmd_extract(const RunConfig& config, const std::filesystem::path& input, const std::filesystem::path& out_dir,
                Streams io);
/// Without a format both report.json and report.csv are written.
int cmd_eval(const RunConfig& config, const std::filesystem::path& dataset_root,
             const std::filesystem::path& features_dir, const std::filesystem::path& out_dir,
             std::optional<eval::ReportFormat> format, Streams io);
int cmd_gen_stability(const RunConfig& config, const std::filesystem::path& depth_file,
                      const std::filesystem::path& out, Streams io);

struct VerifyOptions {
    /// Test hook: corrupts one convolution weight after the oracle output is
    /// captured, so the suite must fail.
    bool inject_fault = false;
};
int cmd_verify(const RunConfig& config, const VerifyOptions& options, Streams io);

/// Full command-line entry point.
int run(int argc, char** argv);

}  // namespace gess::cli
