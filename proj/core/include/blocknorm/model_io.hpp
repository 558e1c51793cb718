// Model directories: `model.json` plus one NPY file per parameter tensor.
//
//   {
//     "input_shape": [C, H, W],
//     "blocks": [
//       {"name": "block1", "order_style": "Conv-BN-ReLU", "residual": false,
//        "layers": [{"kind": "conv2d", "stride": 1, "padding": 1,
//                    "weight_file": "block1.layers0.weight.npy",
//                    "bias_file": "block1.layers0.bias.npy"},
//                   {"kind": "batchnorm", "eps": 1e-5,
//                    "gamma_file": ..., "beta_file": ...,
//                    "mean_file": ..., "var_file": ...},
//                   {"kind": "relu"}],
//        "downsample": [...], "post_layers": [...]}
//     ],
//     "head": [{"kind": "avgpool-global"}, {"kind": "flatten"},
//              {"kind": "linear", "weight_file": ..., "bias_file": ...}]
//   }
//
// maxpool layers carry "window" and "stride". Tensor paths are relative to
// the model directory.
#pragma once

#include <filesystem>

#include "blocknorm/model.hpp"

namespace blocknorm {

// Throws IoError, FormatError (bad JSON / tensor files), ShapeError or
// ConfigError (invalid architecture).
ModelSpec load_model(const std::filesystem::path& dir);

// Writes model.json and parameter files into dir (created if missing).
void save_model(const ModelSpec& model, const std::filesystem::path& dir);

}  // namespace blocknorm
