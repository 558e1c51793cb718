// Writes the bundled test fixtures: two seeded 3-block CNNs that differ only
// in residual block order (Conv-BN-ReLU vs BN-ReLU-Conv), a small synthetic
// dataset with two OOD sets, its manifest, and a probe image.
//
//   blocknorm_fixtures <out-dir>
//
// Output is a pure function of the constants below; regenerate goldens after
// changing anything here.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "blocknorm/blocknorm.hpp"

namespace fs = std::filesystem;
using namespace blocknorm;

namespace {

constexpr std::uint64_t kFixtureSeed = 20240607;
constexpr std::size_t kChannels = 3, kSize = 16;
constexpr std::size_t kTrain = 24, kTest = 16, kOod = 12;

class Gen {
public:
    explicit Gen(std::string_view stream) : rng_(substream_key(kFixtureSeed, stream)) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng_.next() >> 11) * 0x1.0p-53;
    }
    double normal() {
        const double u1 = uniform(1e-12, 1.0), u2 = uniform(0.0, 1.0);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    CounterRng rng_;
};

Tensor he_conv(Gen& g, std::size_t out, std::size_t in, std::size_t k) {
    Tensor w(Shape{out, in, k, k});
    const double scale = std::sqrt(2.0 / static_cast<double>(in * k * k));
    for (float& v : w.mutable_data()) v = static_cast<float>(g.normal() * scale);
    return w;
}

Tensor uniform_vec(Gen& g, std::size_t n, double lo, double hi) {
    Tensor t(Shape{n});
    for (float& v : t.mutable_data()) v = static_cast<float>(g.uniform(lo, hi));
    return t;
}

Conv2d conv(Gen& g, std::size_t out, std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
            bool bias) {
    Conv2d c;
    c.stride = stride;
    c.padding = pad;
    c.weight = he_conv(g, out, in, k);
    if (bias) c.bias = uniform_vec(g, out, -0.1, 0.1);
    return c;
}

BatchNorm bn(Gen& g, std::size_t c) {
    BatchNorm b;
    b.gamma = uniform_vec(g, c, 0.8, 1.2);
    b.beta = uniform_vec(g, c, -0.1, 0.1);
    b.running_mean = uniform_vec(g, c, -0.1, 0.1);
    b.running_var = uniform_vec(g, c, 0.5, 1.5);
    b.eps = 1e-5;
    return b;
}

ModelSpec make_model(OrderStyle style) {
    // Same stream for both variants, so parameters of equal shape coincide.
    Gen g("model");
    BlockSpec stem{"block1", {conv(g, 8, kChannels, 3, 1, 1, true), bn(g, 8), ReLU{}, MaxPool{2, 2}}};

    Conv2d c2a = conv(g, 8, 8, 3, 1, 1, false), c2b = conv(g, 8, 8, 3, 1, 1, false);
    BatchNorm b2a = bn(g, 8), b2b = bn(g, 8);
    Conv2d c3a = conv(g, 16, 8, 3, 2, 1, false), c3b = conv(g, 16, 16, 3, 1, 1, false);
    Conv2d c3d = conv(g, 16, 8, 1, 2, 0, false);
    BatchNorm b3a = bn(g, 16), b3b = bn(g, 16), b3d = bn(g, 16);
    BatchNorm b2pre = bn(g, 8), b3pre = bn(g, 8);

    BlockSpec block2{"block2"}, block3{"block3"};
    block2.residual = block3.residual = true;
    block2.order_style = block3.order_style = style;
    if (style == OrderStyle::ConvBnRelu) {
        block2.layers = {c2a, b2a, ReLU{}, c2b, b2b};
        block2.post_layers = {ReLU{}};
        block3.layers = {c3a, b3a, ReLU{}, c3b, b3b};
        block3.downsample = {c3d, b3d};
        block3.post_layers = {ReLU{}};
    } else {
        block2.layers = {b2pre, ReLU{}, c2a, b2a, ReLU{}, c2b};
        block3.layers = {b3pre, ReLU{}, c3a, b3a, ReLU{}, c3b};
        block3.downsample = {c3d};
    }

    Linear fc;
    fc.weight = he_conv(g, 4, 16, 1).reshaped(Shape{4, 16});
    fc.bias = uniform_vec(g, 4, -0.1, 0.1);
    return ModelSpec({kChannels, kSize, kSize}, {stem, block2, block3}, {GlobalAvgPool{}, Flatten{}, fc});
}

// ID: smooth oriented gratings with a bright centered blob.
Tensor id_image(Gen& g) {
    Tensor t(Shape{kChannels, kSize, kSize});
    const double theta = g.uniform(0.0, std::numbers::pi);
    const double freq = g.uniform(0.3, 0.6);
    const double phase = g.uniform(0.0, 2.0 * std::numbers::pi);
    const double cy = g.uniform(5.0, 10.0), cx = g.uniform(5.0, 10.0);
    for (std::size_t c = 0; c < kChannels; ++c) {
        const double gain = g.uniform(0.7, 1.3);
        for (std::size_t y = 0; y < kSize; ++y) {
            for (std::size_t x = 0; x < kSize; ++x) {
                const double u = std::cos(theta) * x + std::sin(theta) * y;
                const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
                const double v = gain * (0.8 * std::sin(freq * u + phase) + 1.5 * std::exp(-r2 / 12.0)) +
                                 0.05 * g.normal();
                t.at(c, y, x) = static_cast<float>(v);
            }
        }
    }
    return t;
}

Tensor noise_image(Gen& g) {
    Tensor t(Shape{kChannels, kSize, kSize});
    for (float& v : t.mutable_data()) v = static_cast<float>(g.uniform(-2.0, 2.0));
    return t;
}

Tensor flat_image(Gen& g) {
    Tensor t(Shape{kChannels, kSize, kSize});
    const double level = g.uniform(-0.5, 0.5);
    for (float& v : t.mutable_data()) v = static_cast<float>(level + 0.02 * g.normal());
    return t;
}

template <class F>
nlohmann::json write_set(const fs::path& root, const std::string& prefix, std::size_t n, F&& make) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "data/%s_%03zu.npy", prefix.c_str(), i);
        write_tensor(make(), root / name);
        list.push_back(name);
    }
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: blocknorm_fixtures <out-dir>\n";
        return 2;
    }
    const fs::path root = argv[1];
    try {
        fs::create_directories(root / "data");
        save_model(make_model(OrderStyle::ConvBnRelu), root / "model_cbr");
        save_model(make_model(OrderStyle::BnReluConv), root / "model_brc");

        Gen id("id"), noise("noise"), flat("flat"), probe("probe");
        nlohmann::ordered_json m;
        m["id_train"] = write_set(root, "id_train", kTrain, [&] { return id_image(id); });
        m["id_test"] = write_set(root, "id_test", kTest, [&] { return id_image(id); });
        m["ood_sets"]["flat"] = write_set(root, "ood_flat", kOod, [&] { return flat_image(flat); });
        m["ood_sets"]["noise"] = write_set(root, "ood_noise", kOod, [&] { return noise_image(noise); });
        m["preprocessing"] = {{"mean", {0.0, 0.0, 0.0}}, {"std", {1.0, 1.0, 1.0}}, {"size", {kSize, kSize}}};
        write_text_file(root / "manifest.json", m.dump(2) + "\n");

        write_tensor(id_image(probe), root / "probe.npy");
    } catch (const Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
