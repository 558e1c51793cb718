// Block selection by mean NormRatio.
//
// For each training sample x_i and its jigsaw counterpart x̂_i, every block n
// gets the ratio R(n,i) = FeatureNorm(x_i; B_n) / FeatureNorm(x̂_i; B_n). A
// block's score R_n is the arithmetic mean of its per-sample ratios (not a
// ratio of means), and the block with the largest R_n is selected. Samples
// whose pseudo-OOD norm is zero at a block are left out of that block's mean
// and counted. Exact ties go to the earliest block.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "blocknorm/jigsaw.hpp"
#include "blocknorm/model.hpp"
#include "blocknorm/samples.hpp"

namespace blocknorm {

struct BlockRatio {
    std::string name;
    double mean_ratio = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
};

struct SelectionReport {
    std::vector<BlockRatio> per_block;  // model block order
    std::string selected;
    std::size_t selected_index = 0;
    std::size_t sample_count = 0;  // I, after any subsampling
    std::uint64_t jigsaw_seed = 0;
    // Source indices that were used, ascending.
    std::vector<std::size_t> sample_indices;
    // [sample][block] FeatureNorm of x_i and of its jigsaw image.
    std::vector<std::vector<double>> id_norms;
    std::vector<std::vector<double>> pseudo_norms;

    std::size_t total_skipped() const noexcept;
};

struct SelectionOptions {
    // 0 means use every sample.
    std::size_t max_samples = 0;
    std::uint64_t subsample_key = 0;
    unsigned threads = 1;
};

// Throws InputError for an empty source and SelectionError when every
// sample is degenerate at some block.
SelectionReport select_block(const ModelSpec& model, const SampleSource& id_train,
                             const JigsawConfig& jigsaw, const SelectionOptions& options = {});

}  // namespace blocknorm
