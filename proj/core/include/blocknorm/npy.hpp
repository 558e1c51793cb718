// NPY tensor files.
//
// Only the subset this project needs: little-endian float32 ('<f4'),
// C order, rank 1..4. Files are written in format version 1.0 with the
// same header layout numpy emits (growth-axis padding, 64-byte alignment),
// so numpy.save and write_tensor produce identical bytes for the same array.
// Versions 1.0 and 2.0 are accepted on read.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "blocknorm/tensor.hpp"

namespace blocknorm {

// Throws IoError if the file cannot be opened, FormatError for a malformed
// header or payload size mismatch, DataError for NaN/Inf values.
Tensor read_tensor(const std::filesystem::path& path);

// Reads only the header; no payload validation beyond size.
Shape read_tensor_shape(const std::filesystem::path& path);

// Throws IoError when the file cannot be written.
void write_tensor(const Tensor& t, const std::filesystem::path& path);

// In-memory encode/decode; used by the file functions above.
std::string encode_npy(const Tensor& t);
Tensor decode_npy(std::string_view bytes, const std::string& origin = "<memory>");

// The header text (dict + padding + newline) numpy writes for a float32 array.
std::string npy_header_text(const Shape& shape);

}  // namespace blocknorm
