#include "blocknorm/errors.hpp"

namespace blocknorm {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

ManifestError::ManifestError(const std::string& message, std::string path)
    : Error("ManifestError", path.empty() ? message : message + ": " + path),
      path_(std::move(path)) {}

namespace {

std::string degenerate_message(const std::string& block,
                               std::optional<std::size_t> sample) {
    std::string msg = "pseudo-OOD FeatureNorm is zero";
    if (!block.empty()) msg += " at block '" + block + "'";
    if (sample) msg += " for sample " + std::to_string(*sample);
    return msg;
}

}  // namespace

DegenerateRatio::DegenerateRatio(std::string block,
                                 std::optional<std::size_t> sample)
    : Error("DegenerateRatio", degenerate_message(block, sample)),
      block_(std::move(block)),
      sample_(sample) {}

DegenerateRatio::DegenerateRatio(const std::string& message)
    : Error("DegenerateRatio", message) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error("StageError",
            "[" + stage + "] " + cause.kind() + ": " + cause.what()),
      stage_(std::move(stage)),
      cause_kind_(cause.kind()) {}

}  // namespace blocknorm
