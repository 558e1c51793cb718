#include "blocknorm/selection.hpp"

#include "blocknorm/errors.hpp"
#include "blocknorm/featurenorm.hpp"

namespace blocknorm {

std::size_t SelectionReport::total_skipped() const noexcept {
    std::size_t n = 0;
    for (const auto& b : per_block) n += b.skipped;
    return n;
}

SelectionReport select_block(const ModelSpec& model, const SampleSource& id_train,
                             const JigsawConfig& jigsaw, const SelectionOptions& options) {
    if (id_train.empty()) throw InputError("block selection needs at least one training sample");

    SelectionReport report;
    report.jigsaw_seed = jigsaw.seed;
    report.sample_indices = subsample_indices(id_train.size(), options.max_samples, options.subsample_key);
    const std::size_t count = report.sample_indices.size();
    const std::size_t blocks = model.num_blocks();
    report.sample_count = count;
    report.id_norms.assign(count, std::vector<double>(blocks));
    report.pseudo_norms.assign(count, std::vector<double>(blocks));

    parallel_for(count, options.threads, [&](std::size_t i) {
        const std::size_t source_index = report.sample_indices[i];
        const Tensor x = id_train.load(source_index);
        const Tensor x_hat = make_jigsaw(x, jigsaw, source_index);
        const auto taps = forward_blocks(model, x);
        const auto pseudo_taps = forward_blocks(model, x_hat);
        for (std::size_t n = 0; n < blocks; ++n) {
            report.id_norms[i][n] = feature_norm_score(taps[n]);
            report.pseudo_norms[i][n] = feature_norm_score(pseudo_taps[n]);
        }
    });

    // Ordered reduction keeps serial and threaded runs bitwise identical.
    report.per_block.resize(blocks);
    for (std::size_t n = 0; n < blocks; ++n) {
        BlockRatio& br = report.per_block[n];
        br.name = model.blocks()[n].name;
        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            try {
                sum += norm_ratio(report.id_norms[i][n], report.pseudo_norms[i][n], br.name,
                                  report.sample_indices[i]);
                ++br.used;
            } catch (const DegenerateRatio&) {
                ++br.skipped;
            }
        }
        if (br.used == 0) {
            throw SelectionError("every sample has a zero pseudo-OOD FeatureNorm at block '" + br.name + "'");
        }
        br.mean_ratio = sum / static_cast<double>(br.used);
    }

    std::size_t best = 0;
    for (std::size_t n = 1; n < blocks; ++n) {
        if (report.per_block[n].mean_ratio > report.per_block[best].mean_ratio) best = n;
    }
    report.selected_index = best;
    report.selected = report.per_block[best].name;
    return report;
}

}  // namespace blocknorm
