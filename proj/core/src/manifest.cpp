#include "blocknorm/manifest.hpp"

#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "blocknorm/errors.hpp"
#include "blocknorm/npy.hpp"

namespace blocknorm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<fs::path> path_list(const json& j, const std::string& key, const fs::path& base) {
    if (!j.is_array()) throw ManifestError("'" + key + "' must be an array of paths");
    std::vector<fs::path> out;
    out.reserve(j.size());
    for (const auto& item : j) {
        if (!item.is_string()) throw ManifestError("'" + key + "' entries must be strings");
        fs::path p(item.get<std::string>());
        if (p.is_relative()) p = base / p;
        if (!fs::is_regular_file(p)) throw ManifestError("referenced file does not exist", p.string());
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<double> real_list(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) throw ManifestError("preprocessing." + key + " must be a nonempty array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ManifestError("preprocessing." + key + " entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

void check_sample_shapes(const Manifest& m) {
    const fs::path* first = nullptr;
    if (!m.id_train.empty()) first = &m.id_train.front();
    else if (!m.id_test.empty()) first = &m.id_test.front();
    if (!first) return;
    Shape shape;
    try {
        shape = read_tensor_shape(*first);
    } catch (const Error& e) {
        throw ManifestError(std::string("unreadable sample tensor (") + e.what() + ")", first->string());
    }
    if (shape.size() != 3) throw ManifestError("sample tensors must be C x H x W", first->string());
    const auto& pp = m.preprocessing;
    if (pp.mean.size() != shape[0]) {
        throw ManifestError("preprocessing mean/std have " + std::to_string(pp.mean.size()) +
                                " entries but samples have " + std::to_string(shape[0]) + " channels",
                            first->string());
    }
    if (pp.height != shape[1] || pp.width != shape[2]) {
        throw ManifestError("preprocessing size does not match sample spatial size " +
                                shape_to_string(shape),
                            first->string());
    }
}

}  // namespace

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ManifestError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ManifestError("manifest must be a JSON object");
    for (const char* key : {"id_train", "id_test", "ood_sets", "preprocessing"}) {
        if (!j.contains(key)) throw ManifestError(std::string("missing key '") + key + "'");
    }

    Manifest m;
    m.id_train = path_list(j["id_train"], "id_train", base_dir);
    m.id_test = path_list(j["id_test"], "id_test", base_dir);
    if (!j["ood_sets"].is_object()) throw ManifestError("'ood_sets' must be an object");
    for (const auto& [name, list] : j["ood_sets"].items()) {
        m.ood_sets[name] = path_list(list, "ood_sets." + name, base_dir);
    }

    const json& pp = j["preprocessing"];
    if (!pp.is_object()) throw ManifestError("'preprocessing' must be an object");
    for (const char* key : {"mean", "std", "size"}) {
        if (!pp.contains(key)) throw ManifestError(std::string("missing key 'preprocessing.") + key + "'");
    }
    m.preprocessing.mean = real_list(pp["mean"], "mean");
    m.preprocessing.std = real_list(pp["std"], "std");
    if (m.preprocessing.mean.size() != m.preprocessing.std.size()) {
        throw ManifestError("preprocessing mean and std lengths differ");
    }
    for (double s : m.preprocessing.std) {
        if (!(s > 0.0)) throw ManifestError("preprocessing std entries must be > 0");
    }
    const json& size = pp["size"];
    if (!size.is_array() || size.size() != 2 || !size[0].is_number_unsigned() ||
        !size[1].is_number_unsigned() || size[0].get<std::size_t>() == 0 ||
        size[1].get<std::size_t>() == 0) {
        throw ManifestError("preprocessing.size must be [H, W] with positive integers");
    }
    m.preprocessing.height = size[0].get<std::size_t>();
    m.preprocessing.width = size[1].get<std::size_t>();

    check_sample_shapes(m);
    return m;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, path.parent_path());
}

}  // namespace blocknorm
