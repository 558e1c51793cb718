#include "blocknorm/npy.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <variant>

#include "blocknorm/errors.hpp"

namespace blocknorm {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kAlign = 64;
// numpy reserves room so the leading shape entry can grow in place.
constexpr std::size_t kGrowthAxisMaxDigits = 21;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

// Python-literal subset found in NPY headers.
struct PyTuple {
    std::vector<std::size_t> items;
};
using PyValue = std::variant<std::string, bool, PyTuple>;

class HeaderParser {
public:
    HeaderParser(std::string_view text, const std::string& origin)
        : text_(text), origin_(origin) {}

    std::map<std::string, PyValue> parse_dict() {
        std::map<std::string, PyValue> out;
        expect('{');
        skip_ws();
        while (peek() != '}') {
            std::string key = parse_string();
            expect(':');
            out[key] = parse_value();
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
            } else if (peek() != '}') {
                fail("expected ',' or '}'");
            }
        }
        ++pos_;
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters after header dict");
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(origin_ + ": malformed NPY header (" + what + ")");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() const {
        if (pos_ >= text_.size()) fail("unexpected end of header");
        return text_[pos_];
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string parse_string() {
        skip_ws();
        char quote = peek();
        if (quote != '\'' && quote != '"') fail("expected quoted key");
        ++pos_;
        std::size_t end = text_.find(quote, pos_);
        if (end == std::string_view::npos) fail("unterminated string");
        std::string s(text_.substr(pos_, end - pos_));
        pos_ = end + 1;
        return s;
    }

    std::size_t parse_uint() {
        skip_ws();
        std::size_t start = pos_;
        std::size_t v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(text_[pos_] - '0');
            ++pos_;
        }
        if (start == pos_) fail("expected non-negative integer");
        // Python 2 era writers emit long literals such as 3L.
        if (pos_ < text_.size() && text_[pos_] == 'L') ++pos_;
        return v;
    }

    PyValue parse_value() {
        skip_ws();
        char c = peek();
        if (c == '\'' || c == '"') return parse_string();
        if (text_.substr(pos_, 4) == "True") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "False") {
            pos_ += 5;
            return false;
        }
        if (c == '(') {
            ++pos_;
            PyTuple tup;
            skip_ws();
            while (peek() != ')') {
                tup.items.push_back(parse_uint());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                } else if (peek() != ')') {
                    fail("expected ',' or ')' in shape");
                }
            }
            ++pos_;
            return tup;
        }
        fail("unsupported header value");
    }

    std::string_view text_;
    const std::string& origin_;
    std::size_t pos_ = 0;
};

std::string python_tuple(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    if (shape.size() == 1) s += ",";
    return s + ")";
}

struct ParsedHeader {
    Shape shape;
    std::size_t payload_offset = 0;
};

ParsedHeader parse_header(std::string_view bytes, const std::string& origin) {
    if (bytes.size() < kMagicLen + 2 || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
        throw FormatError(origin + ": not an NPY file (bad magic)");
    }
    const auto major = static_cast<unsigned char>(bytes[6]);
    const auto minor = static_cast<unsigned char>(bytes[7]);
    std::size_t header_len = 0;
    std::size_t prefix = 0;
    if (major == 1 && minor == 0) {
        if (bytes.size() < 10) throw FormatError(origin + ": truncated NPY preamble");
        header_len = static_cast<unsigned char>(bytes[8]) |
                     (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
        prefix = 10;
    } else if (major == 2 && minor == 0) {
        if (bytes.size() < 12) throw FormatError(origin + ": truncated NPY preamble");
        for (int i = 3; i >= 0; --i) {
            header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
        }
        prefix = 12;
    } else {
        throw FormatError(origin + ": unsupported NPY version " + std::to_string(major) + "." +
                          std::to_string(minor));
    }
    if (bytes.size() < prefix + header_len) throw FormatError(origin + ": truncated NPY header");

    std::string_view text = bytes.substr(prefix, header_len);
    auto dict = HeaderParser(text, origin).parse_dict();

    auto descr = dict.find("descr");
    auto fortran = dict.find("fortran_order");
    auto shape = dict.find("shape");
    if (descr == dict.end() || fortran == dict.end() || shape == dict.end()) {
        throw FormatError(origin + ": NPY header missing descr/fortran_order/shape");
    }
    const auto* descr_s = std::get_if<std::string>(&descr->second);
    if (!descr_s || *descr_s != "<f4") {
        throw FormatError(origin + ": unsupported dtype (only '<f4' is accepted)");
    }
    const auto* fortran_b = std::get_if<bool>(&fortran->second);
    if (!fortran_b) throw FormatError(origin + ": fortran_order must be a boolean");
    if (*fortran_b) throw FormatError(origin + ": fortran_order arrays are not supported");
    const auto* shape_t = std::get_if<PyTuple>(&shape->second);
    if (!shape_t) throw FormatError(origin + ": shape must be a tuple");
    if (shape_t->items.empty() || shape_t->items.size() > kMaxRank) {
        throw FormatError(origin + ": rank " + std::to_string(shape_t->items.size()) +
                          " outside 1.." + std::to_string(kMaxRank));
    }
    for (std::size_t d : shape_t->items) {
        if (d == 0) throw FormatError(origin + ": zero-sized dimension");
    }
    return {Shape(shape_t->items.begin(), shape_t->items.end()), prefix + header_len};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

}  // namespace

std::string npy_header_text(const Shape& shape) {
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                         python_tuple(shape) + ", }";
    if (!shape.empty()) {
        std::size_t digits = std::to_string(shape.front()).size();
        if (digits < kGrowthAxisMaxDigits) header.append(kGrowthAxisMaxDigits - digits, ' ');
    }
    std::size_t hlen = header.size() + 1;
    std::size_t padlen = kAlign - ((kMagicLen + 2 + 2 + hlen) % kAlign);
    if (padlen == kAlign) padlen = 0;
    header.append(padlen, ' ');
    header += '\n';
    return header;
}

std::string encode_npy(const Tensor& t) {
    std::string header = npy_header_text(t.shape());
    if (header.size() > 0xffff) throw FormatError("NPY v1.0 header too long");
    std::string out;
    out.reserve(10 + header.size() + t.size() * 4);
    out.append(kMagic, kMagicLen);
    out.push_back('\x01');
    out.push_back('\x00');
    out.push_back(static_cast<char>(header.size() & 0xff));
    out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
    out += header;
    const std::size_t payload_at = out.size();
    out.resize(payload_at + t.size() * sizeof(float));
    char* dst = out.data() + payload_at;
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto bits = std::bit_cast<std::uint32_t>(t[i]);
        if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
        std::memcpy(dst + i * 4, &bits, 4);
    }
    return out;
}

Tensor decode_npy(std::string_view bytes, const std::string& origin) {
    ParsedHeader h = parse_header(bytes, origin);
    const std::size_t n = shape_numel(h.shape);
    const std::size_t payload = bytes.size() - h.payload_offset;
    if (payload != n * sizeof(float)) {
        throw FormatError(origin + ": payload has " + std::to_string(payload) + " bytes, shape " +
                          shape_to_string(h.shape) + " needs " + std::to_string(n * 4));
    }
    std::vector<float> data(n);
    const char* src = bytes.data() + h.payload_offset;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, src + i * 4, 4);
        if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
        data[i] = std::bit_cast<float>(bits);
    }
    Tensor t(std::move(h.shape), std::move(data));
    if (!t.all_finite()) throw DataError(origin + ": non-finite value in tensor payload");
    return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
    return decode_npy(read_file(path), path.string());
}

Shape read_tensor_shape(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string head(12, '\0');
    in.read(head.data(), 12);
    head.resize(static_cast<std::size_t>(in.gcount()));
    // Re-read with the full header once its length is known.
    if (head.size() >= 10 && std::memcmp(head.data(), kMagic, kMagicLen) == 0) {
        std::size_t len = head[6] == 1
                              ? 10 + (static_cast<unsigned char>(head[8]) |
                                      (static_cast<std::size_t>(static_cast<unsigned char>(head[9])) << 8))
                              : 0;
        if (len == 0 && head.size() == 12) {
            std::size_t hl = 0;
            for (int i = 3; i >= 0; --i) hl = (hl << 8) | static_cast<unsigned char>(head[8 + i]);
            len = 12 + hl;
        }
        in.clear();
        in.seekg(0);
        head.assign(len, '\0');
        in.read(head.data(), static_cast<std::streamsize>(len));
        head.resize(static_cast<std::size_t>(in.gcount()));
    }
    return parse_header(head, path.string()).shape;
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
    std::string bytes = encode_npy(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace blocknorm
