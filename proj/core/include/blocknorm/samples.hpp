#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "blocknorm/tensor.hpp"

namespace blocknorm {

// An indexed collection of input tensors, either on disk (loaded lazily,
// one at a time) or already in memory.
class SampleSource {
public:
    SampleSource() = default;
    static SampleSource from_files(std::vector<std::filesystem::path> files);
    static SampleSource from_tensors(std::vector<Tensor> tensors);

    std::size_t size() const noexcept;
    bool empty() const noexcept { return size() == 0; }
    Tensor load(std::size_t index) const;

private:
    std::variant<std::vector<std::filesystem::path>, std::vector<Tensor>> items_;
};

// Runs fn(i) for i in [0, n) on up to `threads` worker threads. fn must only
// write to per-index storage. The first exception thrown is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// K sorted indices drawn without replacement from [0, n) using the
// counter-based RNG; all of [0, n) when k == 0 or k >= n.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t key);

}  // namespace blocknorm
