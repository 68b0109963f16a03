#include "gess/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "gess/image_io.hpp"

namespace gess::eval {

namespace fs = std::filesystem;

Homography read_homography_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::vector<double> values;
    std::string token;
    while (is >> token) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw std::runtime_error(path.filename().string() + ": non-numeric token '" + token + "'");
        }
    }
    if (values.size() != 9) {
        throw std::runtime_error(path.filename().string() + ": expected 9 numbers, found " +
                                 std::to_string(values.size()));
    }
    std::array<double, 9> h{};
    std::copy(values.begin(), values.end(), h.begin());
    try {
        return Homography(h);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.filename().string() + ": " + e.what());
    }
}

namespace {

std::map<std::string, fs::path> index_images(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && image::is_image_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, fs::path> by_stem;
    for (const auto& f : files) by_stem.emplace(f.stem().string(), f);
    return by_stem;
}

std::vector<SequencePair> scan_sequence(const fs::path& dir) {
    const std::string name = dir.filename().string();
    const auto images = index_images(dir);
    if (images.count("1") == 0) {
        throw std::runtime_error("reference image 1 missing");
    }
    std::vector<SequencePair> pairs;
    for (std::size_t k = 2; k <= kMaxTargetIndex; ++k) {
        const fs::path hfile = dir / ("H_1_" + std::to_string(k));
        if (!fs::exists(hfile)) continue;
        const std::string id = std::to_string(k);
        const auto target = images.find(id);
        if (target == images.end()) {
            throw std::runtime_error("H_1_" + id + " present but image " + id + " missing");
        }
        SequencePair pair;
        pair.sequence = name;
        pair.pair_index = k;
        pair.target_id = id;
        pair.homography = read_homography_file(hfile);
        pair.reference_image = images.at("1");
        pair.target_image = target->second;
        pairs.push_back(std::move(pair));
    }
    if (pairs.empty()) {
        throw std::runtime_error("no H_1_k homography files");
    }
    return pairs;
}

}  // namespace

DatasetScan load_sequences(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw std::runtime_error("dataset root " + root.string() + " is not a readable directory");
    }
    std::vector<fs::path> folders;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) folders.push_back(entry.path());
    }
    std::sort(folders.begin(), folders.end());
    DatasetScan scan;
    for (const auto& folder : folders) {
        try {
            auto pairs = scan_sequence(folder);
            scan.pairs.insert(scan.pairs.end(), pairs.begin(), pairs.end());
        } catch (const std::exception& e) {
            scan.warnings.push_back("skipped sequence " + folder.filename().string() + ": " + e.what());
        }
    }
    return scan;
}

fs::path feature_path(const fs::path& features_dir, const std::string& sequence, const std::string& image_id) {
    return features_dir / sequence / (image_id + kFeatureExtension);
}

}  // namespace gess::eval
