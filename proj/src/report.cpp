#include "gess/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace gess::eval {

using nlohmann::json;

std::string format_fixed(double v) {
    if (std::fabs(v) < 5e-7) v = 0.0;  // no "-0.000000"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

ErrorSummary summarize(const std::vector<double>& errors) {
    ErrorSummary s;
    if (errors.empty()) return s;
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    s.max = sorted.back();
    return s;
}

PairResult evaluate_pair(const SequencePair& pair, const sdak::DescriptorSet& reference,
                         const sdak::DescriptorSet& target, bool mutual) {
    PairResult r;
    r.sequence = pair.sequence;
    r.pair_index = pair.pair_index;
    r.reference_image = pair.reference_id;
    r.target_image = pair.target_id;
    const MatchSet matches = nn_match(reference, target, mutual);
    r.matches = matches.size();
    r.errors = match_errors(matches, reference.keypoints, target.keypoints, pair.homography);
    r.summary = summarize(r.errors);
    r.mma = mma(r.errors);
    return r;
}

EvalReport make_report(ReportMetadata metadata, std::vector<PairResult> pairs, std::vector<std::string> warnings,
                       const std::vector<double>& auc_thresholds) {
    std::sort(pairs.begin(), pairs.end(), [](const PairResult& a, const PairResult& b) {
        if (a.sequence != b.sequence) return a.sequence < b.sequence;
        return a.pair_index < b.pair_index;
    });
    EvalReport report;
    report.metadata = std::move(metadata);
    report.warnings = std::move(warnings);
    Aggregate& agg = report.aggregate;
    agg.pair_count = pairs.size();
    std::vector<std::vector<double>> pooled;
    for (const PairResult& p : pairs) {
        agg.total_matches += p.matches;
        for (std::size_t t = 0; t < kNumThresholds; ++t) agg.mma[t] += p.mma[t];
        pooled.push_back(p.errors);
    }
    if (!pairs.empty()) {
        for (double& m : agg.mma) m /= static_cast<double>(pairs.size());
    }
    agg.mma3 = agg.mma[2];
    for (double t : auc_thresholds) agg.auc.push_back({t, auc(pooled, t)});
    report.pairs = std::move(pairs);
    return report;
}

namespace {

std::string threshold_key(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

// nlohmann's dump prints shortest round-trip floats; reports need fixed decimals.
void dump_fixed(const json& j, std::ostringstream& os, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) os << ",\n";
                first = false;
                os << pad << json(key).dump() << ": ";
                dump_fixed(value, os, indent + 2);
            }
            os << '\n' << close_pad << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i != 0) os << ",\n";
                os << pad;
                dump_fixed(j[i], os, indent + 2);
            }
            os << '\n' << close_pad << ']';
            return;
        }
        case json::value_t::number_float:
            os << format_fixed(j.get<double>());
            return;
        default:
            os << j.dump();
    }
}

json mma_array(const std::array<double, kNumThresholds>& m) {
    json arr = json::array();
    for (double v : m) arr.push_back(v);
    return arr;
}

json to_json(const EvalReport& r) {
    json pairs = json::array();
    for (const PairResult& p : r.pairs) {
        pairs.push_back({{"sequence", p.sequence},
                         {"pairIndex", p.pair_index},
                         {"referenceImage", p.reference_image},
                         {"targetImage", p.target_image},
                         {"matches", p.matches},
                         {"errorMean", p.summary.mean},
                         {"errorMedian", p.summary.median},
                         {"errorMax", p.summary.max},
                         {"mma", mma_array(p.mma)}});
    }
    json auc = json::object();
    for (const AucEntry& a : r.aggregate.auc) auc[threshold_key(a.threshold)] = a.value;
    return {
        {"metadata",
         {{"dataset", r.metadata.dataset},
          {"configHash", r.metadata.config_hash},
          {"toolVersion", r.metadata.tool_version},
          {"matcher", r.metadata.matcher}}},
        {"aggregate",
         {{"mma", mma_array(r.aggregate.mma)},
          {"mma3", r.aggregate.mma3},
          {"auc", auc},
          {"pairCount", r.aggregate.pair_count},
          {"totalMatches", r.aggregate.total_matches}}},
        {"pairs", pairs},
        {"warnings", r.warnings},
    };
}

std::string emit_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "sequence,pairIndex,matches";
    for (std::size_t t = 1; t <= kNumThresholds; ++t) os << ",mma" << t;
    os << '\n';
    for (const PairResult& p : r.pairs) {
        os << p.sequence << ',' << p.pair_index << ',' << p.matches;
        for (double v : p.mma) os << ',' << format_fixed(v);
        os << '\n';
    }
    os << "aggregate,all," << r.aggregate.total_matches;
    for (double v : r.aggregate.mma) os << ',' << format_fixed(v);
    os << '\n';
    return os.str();
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
    if (format == ReportFormat::csv) {
        return emit_csv(report);
    }
    std::ostringstream os;
    dump_fixed(to_json(report), os, 0);
    os << '\n';
    return os.str();
}

std::string emit_plot_data(const EvalReport& report) {
    std::array<double, kNumThresholds> illum{};
    std::array<double, kNumThresholds> view{};
    std::size_t n_illum = 0;
    std::size_t n_view = 0;
    for (const PairResult& p : report.pairs) {
        const bool is_illum = p.sequence.rfind("i_", 0) == 0;
        const bool is_view = p.sequence.rfind("v_", 0) == 0;
        for (std::size_t t = 0; t < kNumThresholds; ++t) {
            if (is_illum) illum[t] += p.mma[t];
            if (is_view) view[t] += p.mma[t];
        }
        n_illum += is_illum ? 1 : 0;
        n_view += is_view ? 1 : 0;
    }
    std::ostringstream os;
    os << "threshold,illumination,viewpoint,all\n";
    for (std::size_t t = 0; t < kNumThresholds; ++t) {
        const double i = n_illum != 0 ? illum[t] / static_cast<double>(n_illum) : 0.0;
        const double v = n_view != 0 ? view[t] / static_cast<double>(n_view) : 0.0;
        os << t + 1 << ',' << format_fixed(i) << ',' << format_fixed(v) << ','
           << format_fixed(report.aggregate.mma[t]) << '\n';
    }
    return os.str();
}

EvalReport parse_report_json(const std::string& text) {
    const json j = json::parse(text);
    EvalReport r;
    const json& meta = j.at("metadata");
    r.metadata = {meta.at("dataset").get<std::string>(), meta.at("configHash").get<std::string>(),
                  meta.at("toolVersion").get<std::string>(), meta.at("matcher").get<std::string>()};
    for (const json& p : j.at("pairs")) {
        PairResult pr;
        pr.sequence = p.at("sequence").get<std::string>();
        pr.pair_index = p.at("pairIndex").get<std::size_t>();
        pr.reference_image = p.at("referenceImage").get<std::string>();
        pr.target_image = p.at("targetImage").get<std::string>();
        pr.matches = p.at("matches").get<std::size_t>();
        pr.summary = {p.at("errorMean").get<double>(), p.at("errorMedian").get<double>(),
                      p.at("errorMax").get<double>()};
        const auto m = p.at("mma").get<std::vector<double>>();
        std::copy_n(m.begin(), std::min(m.size(), kNumThresholds), pr.mma.begin());
        r.pairs.push_back(std::move(pr));
    }
    const json& agg = j.at("aggregate");
    const auto m = agg.at("mma").get<std::vector<double>>();
    std::copy_n(m.begin(), std::min(m.size(), kNumThresholds), r.aggregate.mma.begin());
    r.aggregate.mma3 = agg.at("mma3").get<double>();
    r.aggregate.pair_count = agg.at("pairCount").get<std::size_t>();
    r.aggregate.total_matches = agg.at("totalMatches").get<std::size_t>();
    for (const auto& [key, value] : agg.at("auc").items()) {
        r.aggregate.auc.push_back({std::stod(key), value.get<double>()});
    }
    std::sort(r.aggregate.auc.begin(), r.aggregate.auc.end(),
              [](const AucEntry& a, const AucEntry& b) { return a.threshold < b.threshold; });
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

}  // namespace gess::eval
