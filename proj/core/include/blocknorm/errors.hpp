#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace blocknorm {

// Base of every error the library raises. kind() is a stable tag used in
// CLI diagnostics ("FormatError", "ShapeError", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message);
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define BLOCKNORM_DECLARE_ERROR(Name)                                          \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& message) : Error(#Name, message) {}   \
    }

BLOCKNORM_DECLARE_ERROR(FormatError);
BLOCKNORM_DECLARE_ERROR(DataError);
BLOCKNORM_DECLARE_ERROR(IoError);
BLOCKNORM_DECLARE_ERROR(ShapeError);
BLOCKNORM_DECLARE_ERROR(SelectionError);
BLOCKNORM_DECLARE_ERROR(InputError);
BLOCKNORM_DECLARE_ERROR(ConfigError);

#undef BLOCKNORM_DECLARE_ERROR

class ManifestError : public Error {
public:
    ManifestError(const std::string& message, std::string path = {});
    // The offending file, empty when the problem is not path-related.
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// A FeatureNorm ratio whose denominator is zero.
class DegenerateRatio : public Error {
public:
    DegenerateRatio(std::string block, std::optional<std::size_t> sample);
    explicit DegenerateRatio(const std::string& message);

    const std::string& block() const noexcept { return block_; }
    std::optional<std::size_t> sample() const noexcept { return sample_; }

private:
    std::string block_;
    std::optional<std::size_t> sample_;
};

// Wraps an error raised inside a pipeline stage, keeping the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause);
    const std::string& stage() const noexcept { return stage_; }
    const std::string& cause_kind() const noexcept { return cause_kind_; }

private:
    std::string stage_;
    std::string cause_kind_;
};

}  // namespace blocknorm
