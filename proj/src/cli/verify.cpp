#include <cstdio>
#include <ostream>

#include "gess/cli.hpp"
#include "gess/selfcheck.hpp"

namespace gess::cli {

int cmd_verify(const RunConfig& config, const VerifyOptions& options, Streams io) {
    const auto results = selfcheck::run_all(config.seed, options.inject_fault);
    std::size_t failed = 0;
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof line, "%s  %-52s max_error=%.3e  tolerance=%.1e", r.passed ? "PASS" : "FAIL",
                      r.name.c_str(), r.max_error, r.tolerance);
        io.out << line;
        if (!r.passed && !r.detail.empty()) io.out << "  (" << r.detail << ")";
        io.out << "\n";
        if (!r.passed) ++failed;
    }
    io.out << results.size() - failed << "/" << results.size() << " checks passed\n";
    if (failed > 0) {
        io.err << "verify: " << failed << " check(s) failed\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace gess::cli
