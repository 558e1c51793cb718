#include "blocknorm/model_io.hpp"

#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "blocknorm/errors.hpp"
#include "blocknorm/npy.hpp"

namespace blocknorm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Reader {
public:
    explicit Reader(fs::path dir) : dir_(std::move(dir)) {}

    Tensor tensor(const json& j, const char* key, const std::string& scope) const {
        if (!j.contains(key) || !j[key].is_string()) {
            throw FormatError(scope + ": missing '" + key + "'");
        }
        return read_tensor(dir_ / j[key].get<std::string>());
    }

    std::optional<Tensor> optional_tensor(const json& j, const char* key, const std::string& scope) const {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return tensor(j, key, scope);
    }

    LayerSpec layer(const json& j, const std::string& scope) const {
        if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
            throw FormatError(scope + ": layer needs a string 'kind'");
        }
        const std::string kind = j["kind"].get<std::string>();
        if (kind == "conv2d") {
            Conv2d c;
            c.stride = j.value("stride", std::size_t{1});
            c.padding = j.value("padding", std::size_t{0});
            c.weight = tensor(j, "weight_file", scope);
            c.bias = optional_tensor(j, "bias_file", scope);
            return c;
        }
        if (kind == "batchnorm") {
            BatchNorm b;
            b.eps = j.value("eps", 1e-5);
            b.gamma = tensor(j, "gamma_file", scope);
            b.beta = tensor(j, "beta_file", scope);
            b.running_mean = tensor(j, "mean_file", scope);
            b.running_var = tensor(j, "var_file", scope);
            return b;
        }
        if (kind == "relu") return ReLU{};
        if (kind == "maxpool") {
            MaxPool p;
            p.window = j.value("window", std::size_t{2});
            p.stride = j.value("stride", p.window);
            return p;
        }
        if (kind == "avgpool-global") return GlobalAvgPool{};
        if (kind == "flatten") return Flatten{};
        if (kind == "linear") {
            Linear l;
            l.weight = tensor(j, "weight_file", scope);
            l.bias = optional_tensor(j, "bias_file", scope);
            return l;
        }
        throw FormatError(scope + ": unsupported layer kind '" + kind + "'");
    }

    std::vector<LayerSpec> layers(const json& j, const char* key, const std::string& scope) const {
        std::vector<LayerSpec> out;
        if (!j.contains(key)) return out;
        if (!j[key].is_array()) throw FormatError(scope + ": '" + key + "' must be an array");
        std::size_t i = 0;
        for (const auto& item : j[key]) {
            out.push_back(layer(item, scope + " " + key + "[" + std::to_string(i++) + "]"));
        }
        return out;
    }

private:
    fs::path dir_;
};

class Writer {
public:
    explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

    std::string put(const Tensor& t, const std::string& stem) const {
        const std::string file = stem + ".npy";
        write_tensor(t, dir_ / file);
        return file;
    }

    json layer(const LayerSpec& spec, const std::string& stem) const {
        json j;
        j["kind"] = layer_kind(spec);
        if (const auto* c = std::get_if<Conv2d>(&spec)) {
            j["stride"] = c->stride;
            j["padding"] = c->padding;
            j["weight_file"] = put(c->weight, stem + ".weight");
            if (c->bias) j["bias_file"] = put(*c->bias, stem + ".bias");
        } else if (const auto* b = std::get_if<BatchNorm>(&spec)) {
            j["eps"] = b->eps;
            j["gamma_file"] = put(b->gamma, stem + ".gamma");
            j["beta_file"] = put(b->beta, stem + ".beta");
            j["mean_file"] = put(b->running_mean, stem + ".running_mean");
            j["var_file"] = put(b->running_var, stem + ".running_var");
        } else if (const auto* p = std::get_if<MaxPool>(&spec)) {
            j["window"] = p->window;
            j["stride"] = p->stride;
        } else if (const auto* l = std::get_if<Linear>(&spec)) {
            j["weight_file"] = put(l->weight, stem + ".weight");
            if (l->bias) j["bias_file"] = put(*l->bias, stem + ".bias");
        }
        return j;
    }

    json layers(const std::vector<LayerSpec>& list, const std::string& stem) const {
        json arr = json::array();
        for (std::size_t i = 0; i < list.size(); ++i) {
            arr.push_back(layer(list[i], stem + std::to_string(i)));
        }
        return arr;
    }

private:
    fs::path dir_;
};

}  // namespace

ModelSpec load_model(const fs::path& dir) {
    const fs::path file = dir / "model.json";
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }

    try {
        Reader reader(dir);
        if (!j.contains("input_shape") || !j["input_shape"].is_array()) {
            throw FormatError("model.json: missing 'input_shape'");
        }
        Shape input = j["input_shape"].get<Shape>();
        if (!j.contains("blocks") || !j["blocks"].is_array()) throw FormatError("model.json: missing 'blocks'");

        std::vector<BlockSpec> blocks;
        for (const auto& jb : j["blocks"]) {
            BlockSpec b;
            b.name = jb.value("name", std::string{});
            const std::string scope = "block '" + b.name + "'";
            b.order_style = parse_order_style(jb.value("order_style", std::string("Conv-BN-ReLU")));
            b.residual = jb.value("residual", false);
            b.layers = reader.layers(jb, "layers", scope);
            b.downsample = reader.layers(jb, "downsample", scope);
            b.post_layers = reader.layers(jb, "post_layers", scope);
            blocks.push_back(std::move(b));
        }
        std::vector<LayerSpec> head = reader.layers(j, "head", "head");
        return ModelSpec(std::move(input), std::move(blocks), std::move(head));
    } catch (const json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

void save_model(const ModelSpec& model, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    Writer w(dir);
    json j;
    j["input_shape"] = model.input_shape();
    j["blocks"] = json::array();
    for (const auto& b : model.blocks()) {
        json jb;
        jb["name"] = b.name;
        jb["order_style"] = std::string(to_string(b.order_style));
        jb["residual"] = b.residual;
        jb["layers"] = w.layers(b.layers, b.name + ".layers");
        if (!b.downsample.empty()) jb["downsample"] = w.layers(b.downsample, b.name + ".downsample");
        if (!b.post_layers.empty()) jb["post_layers"] = w.layers(b.post_layers, b.name + ".post");
        j["blocks"].push_back(std::move(jb));
    }
    j["head"] = w.layers(model.head(), "head");

    std::ofstream out(dir / "model.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "model.json").string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + (dir / "model.json").string());
}

}  // namespace blocknorm
