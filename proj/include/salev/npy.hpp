#ifndef SALEV_NPY_HPP
#define SALEV_NPY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "salev/tensor.hpp"

namespace salev {

// NPY v1.0 binary array IO, restricted to little-endian 64-bit floats
// ('<f8') and integers ('<i8'). Other dtypes are rejected outright; 32-bit
// storage is known to corrupt saliency maps downstream.

struct NpyArray {
    std::vector<std::size_t> shape;
    bool is_float = true;
    std::vector<double> f64;
    std::vector<std::int64_t> i64;
};

void write_npy(const std::string& path, const Tensor& tensor);
void write_npy_i64(const std::string& path, const std::vector<std::size_t>& shape,
                   const std::vector<std::int64_t>& values);

NpyArray read_npy(const std::string& path);
Tensor read_npy_f64(const std::string& path);
std::vector<std::int64_t> read_npy_i64(const std::string& path);

} // namespace salev

#endif
