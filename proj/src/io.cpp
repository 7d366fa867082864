#include "brainalign/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace brainalign::io {

namespace {

constexpr std::string_view kMagic = "ENC1";

template <typename T>
T byteswap_if_big(T value)
{
    if constexpr (std::endian::native == std::endian::little) {
        return value;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }
}

template <typename T>
void append_le(std::string& out, T value)
{
    value = byteswap_if_big(value);
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

template <typename T>
T load_le(const char* src)
{
    T value;
    std::memcpy(&value, src, sizeof(T));
    return byteswap_if_big(value);
}

Dtype parse_dtype(const std::string& name)
{
    if (name == "f64")
        return Dtype::F64;
    if (name == "f32")
        return Dtype::F32;
    throw Enc1Error(Enc1Errc::BadDtype, "ENC1: unsupported dtype '" + name + "'");
}

} // namespace

std::string_view dtype_name(Dtype dtype) { return dtype == Dtype::F64 ? "f64" : "f32"; }

std::size_t dtype_size(Dtype dtype) { return dtype == Dtype::F64 ? 8 : 4; }

std::size_t Tensor::element_count() const
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string encode(const Tensor& tensor)
{
    if (tensor.shape.empty())
        throw std::invalid_argument("ENC1: shape must be non-empty");
    for (auto d : tensor.shape)
        if (d == 0)
            throw std::invalid_argument("ENC1: every dimension must be >= 1");
    if (tensor.values.size() != tensor.element_count())
        throw std::invalid_argument("ENC1: value count does not match shape");

    nlohmann::json header;
    header["dtype"] = dtype_name(tensor.dtype);
    header["order"] = "row-major";
    header["shape"] = tensor.shape;
    const std::string header_text = header.dump();

    std::string out;
    out.reserve(8 + header_text.size() + tensor.values.size() * dtype_size(tensor.dtype));
    out.append(kMagic);
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
    out.append(header_text);
    if (tensor.dtype == Dtype::F64) {
        for (double v : tensor.values)
            append_le(out, std::bit_cast<std::uint64_t>(v));
    } else {
        for (double v : tensor.values)
            append_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

Tensor decode(std::string_view bytes)
{
    if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic)
        throw Enc1Error(Enc1Errc::BadMagic, "ENC1: bad magic");
    if (bytes.size() < 8)
        throw Enc1Error(Enc1Errc::Truncated, "ENC1: truncated header length");
    const auto header_len = load_le<std::uint32_t>(bytes.data() + 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(header_len))
        throw Enc1Error(Enc1Errc::Truncated, "ENC1: truncated header");

    Tensor tensor;
    try {
        const auto header = nlohmann::json::parse(bytes.substr(8, header_len));
        if (header.at("order").get<std::string>() != "row-major")
            throw Enc1Error(Enc1Errc::BadHeader, "ENC1: only row-major order is supported");
        tensor.dtype = parse_dtype(header.at("dtype").get<std::string>());
        tensor.shape = header.at("shape").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw Enc1Error(Enc1Errc::BadHeader, std::string("ENC1: malformed header: ") + e.what());
    }
    if (tensor.shape.empty())
        throw Enc1Error(Enc1Errc::BadHeader, "ENC1: empty shape");
    for (auto d : tensor.shape)
        if (d == 0)
            throw Enc1Error(Enc1Errc::BadHeader, "ENC1: zero-sized dimension");

    const std::size_t count = tensor.element_count();
    const std::size_t width = dtype_size(tensor.dtype);
    const std::string_view payload = bytes.substr(8 + header_len);
    if (payload.size() < count * width)
        throw Enc1Error(Enc1Errc::Truncated, "ENC1: payload shorter than shape implies");
    if (payload.size() != count * width)
        throw Enc1Error(Enc1Errc::ShapeMismatch, "ENC1: payload longer than shape implies");

    tensor.values.resize(count);
    const char* p = payload.data();
    if (tensor.dtype == Dtype::F64) {
        for (std::size_t i = 0; i < count; ++i, p += 8)
            tensor.values[i] = std::bit_cast<double>(load_le<std::uint64_t>(p));
    } else {
        for (std::size_t i = 0; i < count; ++i, p += 4)
            tensor.values[i] = std::bit_cast<float>(load_le<std::uint32_t>(p));
    }
    return tensor;
}

void write_tensor(const Tensor& tensor, const std::filesystem::path& path)
{
    write_file(path, encode(tensor));
}

Tensor read_tensor(const std::filesystem::path& path)
{
    return decode(read_file(path));
}

Matrix to_matrix(const Tensor& tensor)
{
    if (tensor.shape.size() > 2)
        throw std::invalid_argument("ENC1: expected a rank-1 or rank-2 tensor");
    const Index rows = static_cast<Index>(tensor.shape[0]);
    const Index cols = tensor.shape.size() == 2 ? static_cast<Index>(tensor.shape[1]) : 1;
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = tensor.values[k++];
    return m;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Enc1Error(Enc1Errc::Io, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

} // namespace brainalign::io
