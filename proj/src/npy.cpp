#include "salev/npy.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "salev/errors.hpp"

namespace salev {

namespace {

const char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string shape_tuple(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << shape[i] << ",";
        if (i + 1 < shape.size()) os << " ";
    }
    os << ")";
    return os.str();
}

void write_raw(const std::string& path, const std::string& descr,
               const std::vector<std::size_t>& shape, const void* payload,
               std::size_t payload_bytes) {
    std::string header = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " +
                         shape_tuple(shape) + ", }";
    // Pad with spaces so magic + version + length + header is a multiple of 64,
    // ending in a newline.
    const std::size_t base = 6 + 2 + 2;
    std::size_t total = base + header.size() + 1;
    const std::size_t padded = (total + 63) / 64 * 64;
    header.append(padded - total, ' ');
    header.push_back('\n');
    if (header.size() > 65535) {
        raise(ErrorCode::Internal, "npy header too long for v1.0");
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    out.write(kMagic, 6);
    const char version[2] = {'\x01', '\x00'};
    out.write(version, 2);
    const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
    const char lenbytes[2] = {static_cast<char>(hlen & 0xff),
                              static_cast<char>((hlen >> 8) & 0xff)};
    out.write(lenbytes, 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!out) raise(ErrorCode::IoFailure, "failed writing '" + path + "'");
}

// Pulls the value of a quoted or bare key from the header dict. The header
// is machine-written with a fixed layout, but we parse defensively enough to
// accept numpy's own output.
std::string header_field(const std::string& header, const std::string& key) {
    const auto pos = header.find("'" + key + "'");
    if (pos == std::string::npos) {
        raise(ErrorCode::MalformedHeader, "missing key '" + key + "' in npy header");
    }
    auto colon = header.find(':', pos);
    if (colon == std::string::npos) {
        raise(ErrorCode::MalformedHeader, "malformed npy header");
    }
    std::size_t i = colon + 1;
    while (i < header.size() && header[i] == ' ') ++i;
    if (i >= header.size()) raise(ErrorCode::MalformedHeader, "malformed npy header");
    if (header[i] == '\'') {
        const auto end = header.find('\'', i + 1);
        if (end == std::string::npos) raise(ErrorCode::MalformedHeader, "unterminated string");
        return header.substr(i + 1, end - i - 1);
    }
    if (header[i] == '(') {
        const auto end = header.find(')', i);
        if (end == std::string::npos) raise(ErrorCode::MalformedHeader, "unterminated tuple");
        return header.substr(i, end - i + 1);
    }
    auto end = header.find_first_of(",}", i);
    if (end == std::string::npos) raise(ErrorCode::MalformedHeader, "malformed npy header");
    return header.substr(i, end - i);
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
    std::vector<std::size_t> shape;
    std::string digits;
    for (char c : tuple) {
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
        } else if (!digits.empty()) {
            shape.push_back(static_cast<std::size_t>(std::stoull(digits)));
            digits.clear();
        }
    }
    return shape;
}

} // namespace

void write_npy(const std::string& path, const Tensor& tensor) {
    if (!tensor.all_finite()) {
        raise(ErrorCode::NonFiniteInput, "refusing to write non-finite tensor to '" + path + "'");
    }
    write_raw(path, "<f8", tensor.shape(), tensor.data(), tensor.size() * sizeof(double));
}

void write_npy_i64(const std::string& path, const std::vector<std::size_t>& shape,
                   const std::vector<std::int64_t>& values) {
    if (shape_size(shape) != values.size()) {
        raise(ErrorCode::ShapeMismatch, "value count does not match shape");
    }
    write_raw(path, "<i8", shape, values.data(), values.size() * sizeof(std::int64_t));
}

NpyArray read_npy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot open '" + path + "'");

    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kMagic, 6) != 0) {
        raise(ErrorCode::MalformedHeader, "'" + path + "' is not an npy file");
    }
    char version[2];
    in.read(version, 2);
    if (!in || version[0] != 1 || version[1] != 0) {
        raise(ErrorCode::MalformedHeader, "only npy v1.0 is supported");
    }
    unsigned char lenbytes[2];
    in.read(reinterpret_cast<char*>(lenbytes), 2);
    if (!in) raise(ErrorCode::MalformedHeader, "truncated npy header length");
    const std::size_t hlen = static_cast<std::size_t>(lenbytes[0]) |
                             (static_cast<std::size_t>(lenbytes[1]) << 8);
    std::string header(hlen, '\0');
    in.read(header.data(), static_cast<std::streamsize>(hlen));
    if (!in) raise(ErrorCode::MalformedHeader, "truncated npy header");

    const std::string descr = header_field(header, "descr");
    const std::string order = header_field(header, "fortran_order");
    if (order.find("True") != std::string::npos) {
        raise(ErrorCode::UnsupportedDtype, "fortran-order arrays are not supported");
    }

    NpyArray arr;
    arr.shape = parse_shape(header_field(header, "shape"));
    const std::size_t count = shape_size(arr.shape);

    if (descr == "<f8") {
        arr.is_float = true;
        arr.f64.resize(count);
        in.read(reinterpret_cast<char*>(arr.f64.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    } else if (descr == "<i8") {
        arr.is_float = false;
        arr.i64.resize(count);
        in.read(reinterpret_cast<char*>(arr.i64.data()),
                static_cast<std::streamsize>(count * sizeof(std::int64_t)));
    } else {
        raise(ErrorCode::UnsupportedDtype,
              "dtype '" + descr + "' in '" + path +
                  "' is not supported; store arrays as 64-bit ('<f8' or '<i8'), e.g. "
                  "array.astype(np.float64)");
    }
    if (!in || in.gcount() != static_cast<std::streamsize>(
                                  count * (arr.is_float ? sizeof(double) : sizeof(std::int64_t)))) {
        raise(ErrorCode::TruncatedPayload, "'" + path + "' payload is shorter than its shape");
    }
    return arr;
}

Tensor read_npy_f64(const std::string& path) {
    NpyArray arr = read_npy(path);
    if (!arr.is_float) {
        raise(ErrorCode::UnsupportedDtype, "'" + path + "' holds integers, expected '<f8'");
    }
    return Tensor::from_values(arr.shape, std::move(arr.f64));
}

std::vector<std::int64_t> read_npy_i64(const std::string& path) {
    NpyArray arr = read_npy(path);
    if (arr.is_float) {
        raise(ErrorCode::UnsupportedDtype, "'" + path + "' holds floats, expected '<i8'");
    }
    return std::move(arr.i64);
}

} // namespace salev
