#include "gess/param_manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gess/gtf.hpp"
#include "gess/numerics.hpp"

namespace gess {

using nlohmann::json;

const Tensor& ParamDir::tensor(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::out_of_range("parameter '" + name + "' missing from manifest");
    }
    return it->second.tensor;
}

double ParamDir::scalar(const std::string& name) const {
    const auto it = scalars.find(name);
    if (it == scalars.end()) {
        throw std::out_of_range("scalar '" + name + "' missing from manifest");
    }
    return it->second;
}

void ParamDir::put(const std::string& name, Tensor t, std::string role) {
    tensors[name] = ParamEntry{std::move(t), std::move(role)};
}

namespace {

json read_manifest_json(const std::filesystem::path& dir) {
    std::ifstream is(dir / kManifestName);
    if (!is) {
        return json::object();
    }
    return json::parse(is);
}

}  // namespace

void write_param_dir(const ParamDir& params, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest = read_manifest_json(dir);
    if (!manifest.contains("tensors")) manifest["tensors"] = json::object();
    if (!manifest.contains("scalars")) manifest["scalars"] = json::object();
    for (const auto& [name, entry] : params.tensors) {
        const std::string file = name + ".gtf";
        gtf_write(entry.tensor, dir / file);
        manifest["tensors"][name] = {{"file", file}, {"role", entry.role}, {"shape", entry.tensor.dims()}};
    }
    for (const auto& [name, value] : params.scalars) {
        manifest["scalars"][name] = value;
    }
    std::ofstream os(dir / kManifestName, std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot write " + (dir / kManifestName).string());
    }
    os << manifest.dump(2) << '\n';
}

ParamDir read_param_dir(const std::filesystem::path& dir) {
    std::ifstream is(dir / kManifestName);
    if (!is) {
        throw std::runtime_error("cannot open " + (dir / kManifestName).string());
    }
    const json manifest = json::parse(is);
    ParamDir out;
    if (manifest.contains("tensors")) {
        for (const auto& [name, entry] : manifest.at("tensors").items()) {
            Tensor t = gtf_read(dir / entry.at("file").get<std::string>());
            const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            require_same_dims(t.dims(), shape, "manifest shape of " + name);
            out.put(name, std::move(t), entry.value("role", ""));
        }
    }
    if (manifest.contains("scalars")) {
        for (const auto& [name, value] : manifest.at("scalars").items()) {
            out.scalars[name] = value.get<double>();
        }
    }
    return out;
}

}  // namespace gess
