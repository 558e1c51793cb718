#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "blocknorm/blocknorm.hpp"

using namespace blocknorm;

namespace {

const std::filesystem::path kFixtures = BLOCKNORM_FIXTURE_DIR;

Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    Tensor t(shape);
    for (float& v : t.mutable_data()) v = u(rng);
    return t;
}

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> s(n);
    for (double& v : s) v = d(rng);
    return s;
}

}  // namespace

static void BM_FixtureForward(benchmark::State& state) {
    const ModelSpec model = load_model(kFixtures / "model_cbr");
    const Tensor x = read_tensor(kFixtures / "probe.npy");
    for (auto _ : state) benchmark::DoNotOptimize(forward_with_taps(model, x));
}
BENCHMARK(BM_FixtureForward);

static void BM_Conv3x3(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    Conv2d conv;
    conv.padding = 1;
    conv.weight = random_tensor(Shape{c, c, 3, 3}, 1);
    const Tensor x = random_tensor(Shape{c, 32, 32}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, conv));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c * c * 9 * 32 * 32));
}
BENCHMARK(BM_Conv3x3)->Arg(16)->Arg(64);

static void BM_FeatureNorm(benchmark::State& state) {
    const auto hw = static_cast<std::size_t>(state.range(0));
    const Tensor z = random_tensor(Shape{64, hw, hw}, 3);
    for (auto _ : state) benchmark::DoNotOptimize(feature_norm_score(z));
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(z.size() * sizeof(float)));
}
BENCHMARK(BM_FeatureNorm)->Arg(8)->Arg(32)->Arg(224);

static void BM_Jigsaw(benchmark::State& state) {
    const Tensor img = random_tensor(Shape{3, 32, 32}, 4);
    const JigsawConfig cfg{5};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(make_jigsaw(img, cfg, i++));
}
BENCHMARK(BM_Jigsaw);

static void BM_Auroc(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto id = random_scores(n, 6), ood = random_scores(n, 7);
    for (auto _ : state) benchmark::DoNotOptimize(auroc(id, ood));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

static void BM_NpyDecode(benchmark::State& state) {
    const std::string bytes = encode_npy(random_tensor(Shape{3, 224, 224}, 8));
    for (auto _ : state) benchmark::DoNotOptimize(decode_npy(bytes));
    state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(bytes.size()));
}
BENCHMARK(BM_NpyDecode);

BENCHMARK_MAIN();
