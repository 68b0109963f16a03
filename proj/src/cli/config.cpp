#include "gess/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace gess::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

std::size_t to_size(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const unsigned long long n = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

template <std::size_t N>
void to_array(const std::string& key, const std::string& v, std::array<double, N>& out) {
    const auto list = to_list(key, v);
    if (list.size() != N) {
        throw ConfigError(key + ": expected " + std::to_string(N) + " comma-separated values");
    }
    std::copy(list.begin(), list.end(), out.begin());
}

// %.17g keeps doubles exact through a dump/parse cycle.
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Range>
std::string join(const Range& values) {
    std::string out;
    for (double v : values) {
        if (!out.empty()) out += ", ";
        out += num(v);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"paths.params", [](RunConfig& c, const std::string&, const std::string& v) { c.params_dir = v; }},
        {"paths.output", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
        {"sdak.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.alpha = to_double(k, v); }},
        {"sdak.beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.beta = to_double(k, v); }},
        {"sdak.nms_radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.nms_radius = to_size(k, v); }},
        {"sdak.top_k", [](RunConfig& c, const std::string& k, const std::string& v) { c.top_k = to_size(k, v); }},
        {"sdak.score_threshold",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.score_threshold = to_double(k, v); }},
        {"sdak.border_margin",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.border_margin = to_size(k, v); }},
        {"stability.alpha_delta",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.stability.alpha_delta = to_double(k, v); }},
        {"stability.alpha_l",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.stability.alpha_l = to_double(k, v); }},
        {"stability.gamma",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.stability.gamma = to_double(k, v); }},
        {"stability.epsilon",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.stability.epsilon = to_double(k, v); }},
        {"utcf.channels", [](RunConfig& c, const std::string& k, const std::string& v) { c.channels = to_size(k, v); }},
        {"utcf.reduction", [](RunConfig& c, const std::string& k, const std::string& v) { c.reduction = to_size(k, v); }},
        {"utcf.mu", [](RunConfig& c, const std::string& k, const std::string& v) { c.mu = to_double(k, v); }},
        {"semantic.weights",
         [](RunConfig& c, const std::string& k, const std::string& v) { to_array(k, v, c.semantic_weights.weights); }},
        {"classifier.weights",
         [](RunConfig& c, const std::string& k, const std::string& v) { to_array(k, v, c.classifier.weights); }},
        {"classifier.biases",
         [](RunConfig& c, const std::string& k, const std::string& v) { to_array(k, v, c.classifier.biases); }},
        {"matcher.mode",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "mutual") {
                 c.mutual = true;
             } else if (v == "one-way") {
                 c.mutual = false;
             } else {
                 throw ConfigError(k + ": expected 'mutual' or 'one-way', got '" + v + "'");
             }
         }},
        {"eval.auc_thresholds",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.auc_thresholds = to_list(k, v); }},
        {"toy.patch_radius",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.patch_radius = to_size(k, v); }},
        {"toy.relative_threshold",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.relative_threshold = to_double(k, v); }},
        {"run.seed", [](RunConfig& c, const std::string& k, const std::string& v) {
             try {
                 std::size_t used = 0;
                 c.seed = std::stoull(v, &used);
                 if (used != v.size()) throw std::invalid_argument(v);
             } catch (const std::exception&) {
                 throw ConfigError(k + ": expected an unsigned integer");
             }
         }},
        {"run.jobs", [](RunConfig& c, const std::string& k, const std::string& v) { c.jobs = to_size(k, v); }},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("sdak.alpha and sdak.beta must be >= 0");
    if (nms_radius < 1) throw ConfigError("sdak.nms_radius must be >= 1");
    if (top_k < 1) throw ConfigError("sdak.top_k must be >= 1");
    if (!(score_threshold >= 0.0)) throw ConfigError("sdak.score_threshold must be >= 0");
    try {
        stability.validate();
        semantic_weights.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (channels < 1) throw ConfigError("utcf.channels must be >= 1");
    if (reduction < 1) throw ConfigError("utcf.reduction must be >= 1");
    if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("utcf.mu must lie in [0,1]");
    for (double t : auc_thresholds) {
        if (!(t > 0.0)) throw ConfigError("eval.auc_thresholds must be positive");
    }
    if (!(relative_threshold >= 0.0 && relative_threshold < 1.0)) {
        throw ConfigError("toy.relative_threshold must lie in [0,1)");
    }
    if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        it->second(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[paths]\n"
       << "params = " << c.params_dir << "\n"
       << "output = " << c.output_dir << "\n\n"
       << "[sdak]\n"
       << "alpha = " << num(c.alpha) << "\n"
       << "beta = " << num(c.beta) << "\n"
       << "nms_radius = " << c.nms_radius << "\n"
       << "top_k = " << c.top_k << "\n"
       << "score_threshold = " << num(c.score_threshold) << "\n"
       << "border_margin = " << c.border_margin << "\n\n"
       << "[stability]\n"
       << "alpha_delta = " << num(c.stability.alpha_delta) << "\n"
       << "alpha_l = " << num(c.stability.alpha_l) << "\n"
       << "gamma = " << num(c.stability.gamma) << "\n"
       << "epsilon = " << num(c.stability.epsilon) << "\n\n"
       << "[utcf]\n"
       << "channels = " << c.channels << "\n"
       << "reduction = " << c.reduction << "\n"
       << "mu = " << num(c.mu) << "\n\n"
       << "[semantic]\n"
       << "weights = " << join(c.semantic_weights.weights) << "\n\n"
       << "[classifier]\n"
       << "weights = " << join(c.classifier.weights) << "\n"
       << "biases = " << join(c.classifier.biases) << "\n\n"
       << "[matcher]\n"
       << "mode = " << (c.mutual ? "mutual" : "one-way") << "\n\n"
       << "[eval]\n"
       << "auc_thresholds = " << join(c.auc_thresholds) << "\n\n"
       << "[toy]\n"
       << "patch_radius = " << c.patch_radius << "\n"
       << "relative_threshold = " << num(c.relative_threshold) << "\n\n"
       << "[run]\n"
       << "seed = " << c.seed << "\n"
       << "jobs = " << c.jobs << "\n";
    return os.str();
}

std::string config_hash(const RunConfig& config) {
    RunConfig canonical = config;
    // Neither parallelism nor the output location changes results.
    canonical.jobs = 1;
    canonical.output_dir.clear();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump_config(canonical)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gess::cli
