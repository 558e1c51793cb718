#include "blocknorm/samples.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "blocknorm/npy.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

SampleSource SampleSource::from_files(std::vector<std::filesystem::path> files) {
    SampleSource s;
    s.items_ = std::move(files);
    return s;
}

SampleSource SampleSource::from_tensors(std::vector<Tensor> tensors) {
    SampleSource s;
    s.items_ = std::move(tensors);
    return s;
}

std::size_t SampleSource::size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, items_);
}

Tensor SampleSource::load(std::size_t index) const {
    if (const auto* files = std::get_if<std::vector<std::filesystem::path>>(&items_)) {
        return read_tensor(files->at(index));
    }
    return std::get<std::vector<Tensor>>(items_).at(index);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    if (failed.load(std::memory_order_relaxed)) return;
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                        return;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t key) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k == 0 || k >= n) return idx;
    CounterRng rng(key);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace blocknorm
