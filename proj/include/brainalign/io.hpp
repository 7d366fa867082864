#pragma once

// ENC1 container: "ENC1" | u32 LE header length | JSON header | LE payload.
// The header is {"dtype":"f32"|"f64","order":"row-major","shape":[...]}.

#include "brainalign/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace brainalign::io {

enum class Dtype { F32, F64 };

std::string_view dtype_name(Dtype dtype);
std::size_t dtype_size(Dtype dtype);

/// Dense row-major tensor of any rank. f32 payloads are widened to double on
/// read and narrowed on write, which round-trips exactly.
struct Tensor {
    Dtype dtype = Dtype::F64;
    std::vector<std::size_t> shape;
    std::vector<double> values;

    std::size_t element_count() const;
    bool operator==(const Tensor&) const = default;
};

enum class Enc1Errc { Io, BadMagic, BadHeader, BadDtype, Truncated, ShapeMismatch };

class Enc1Error : public IoError {
public:
    Enc1Error(Enc1Errc code, const std::string& what) : IoError(what), code_(code) {}
    Enc1Errc code() const noexcept { return code_; }

private:
    Enc1Errc code_;
};

std::string encode(const Tensor& tensor);
Tensor decode(std::string_view bytes);

void write_tensor(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

template <typename Derived>
Tensor to_tensor(const Eigen::MatrixBase<Derived>& m, Dtype dtype = Dtype::F64)
{
    Tensor t;
    t.dtype = dtype;
    t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    t.values.resize(t.element_count());
    std::size_t k = 0;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            t.values[k++] = static_cast<double>(m(i, j));
    return t;
}

/// Rank-1 tensors become column vectors; higher ranks are rejected.
Matrix to_matrix(const Tensor& tensor);

template <typename Derived>
void write_matrix(const Eigen::MatrixBase<Derived>& m, const std::filesystem::path& path,
                  Dtype dtype = Dtype::F64)
{
    write_tensor(to_tensor(m, dtype), path);
}

inline Matrix read_matrix(const std::filesystem::path& path) { return to_matrix(read_tensor(path)); }

/// Whole-file helpers shared by the loaders.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace brainalign::io
