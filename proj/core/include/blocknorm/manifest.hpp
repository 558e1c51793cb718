#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace blocknorm {

struct Preprocessing {
    std::vector<double> mean;
    std::vector<double> std;
    std::size_t height = 0;
    std::size_t width = 0;
};

// Dataset description: which tensor files play which role. Paths are stored
// resolved against the manifest's directory.
struct Manifest {
    std::vector<std::filesystem::path> id_train;
    std::vector<std::filesystem::path> id_test;
    std::map<std::string, std::vector<std::filesystem::path>> ood_sets;
    Preprocessing preprocessing;
};

// Parses a manifest JSON file and checks that every referenced file exists,
// std entries are positive, and mean/std match the channel count of the
// sample tensors. Throws ManifestError (carrying the offending path) or
// IoError when the manifest itself cannot be read.
Manifest load_manifest(const std::filesystem::path& path);

// Same, from JSON text; relative sample paths resolve against base_dir.
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);

}  // namespace blocknorm
