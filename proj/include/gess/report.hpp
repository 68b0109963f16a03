#pragma once

#include <string>
#include <vector>

#include "gess/dataset.hpp"

namespace gess::eval {

struct ErrorSummary {
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
};

struct PairResult {
    std::string sequence;
    std::size_t pair_index = 0;
    std::string reference_image;
    std::string target_image;
    std::size_t matches = 0;
    std::vector<double> errors;  // kept for pooled AUC, not serialized
    ErrorSummary summary;
    std::array<double, kNumThresholds> mma{};
};

struct AucEntry {
    double threshold = 0.0;
    double value = 0.0;
};

struct Aggregate {
    std::array<double, kNumThresholds> mma{};  // mean over pairs
    double mma3 = 0.0;
    std::vector<AucEntry> auc;
    std::size_t pair_count = 0;
    std::size_t total_matches = 0;
};

struct ReportMetadata {
    std::string dataset;
    std::string config_hash;
    std::string tool_version;
    std::string matcher;
};

struct EvalReport {
    ReportMetadata metadata;
    std::vector<PairResult> pairs;
    std::vector<std::string> warnings;
    Aggregate aggregate;
};

enum class ReportFormat { json, csv };

ErrorSummary summarize(const std::vector<double>& errors);

PairResult evaluate_pair(const SequencePair& pair, const sdak::DescriptorSet& reference,
                         const sdak::DescriptorSet& target, bool mutual);

/// Sorts pairs by (sequence, pair_index) and fills the aggregate block.
EvalReport make_report(ReportMetadata metadata, std::vector<PairResult> pairs, std::vector<std::string> warnings,
                       const std::vector<double>& auc_thresholds);

/// Sorted keys, numbers with six decimals; identical reports give identical bytes.
std::string emit_report(const EvalReport& report, ReportFormat format);
/// threshold,illumination,viewpoint,all mean-MMA table; splits follow the
/// "i_" / "v_" sequence-name prefixes.
std::string emit_plot_data(const EvalReport& report);
/// Reads back the JSON form (errors are not part of it).
EvalReport parse_report_json(const std::string& text);

/// Six-decimal fixed formatting used by every report writer.
std::string format_fixed(double v);

}  // namespace gess::eval
