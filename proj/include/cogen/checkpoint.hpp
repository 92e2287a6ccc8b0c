#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cogen/tensor.hpp"

namespace cogen {

// Binary tensor container: little-endian, fixed layout.
//   magic "CGTC" | u32 version
//   u32 n_meta   | n_meta x { u32 key_len, key bytes, u64 value }
//   u32 n_tensors| each { u32 name_len, name, u32 ndim, i64 dims[ndim] }
//   payload: all tensors' f64 data concatenated in manifest order
// Round trips byte-exactly; used for checkpoints and intermediate state.
struct TensorContainer {
    std::map<std::string, std::uint64_t> meta;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void add(const std::string& name, const Tensor& t) { tensors.emplace_back(name, t); }
    Tensor find(const std::string& name) const;
    bool contains(const std::string& name) const;
};

void write_container(const TensorContainer& c, const std::string& path);
TensorContainer read_container(const std::string& path);

// FNV-1a 64-bit over a byte range; used for content hashes in manifests
// and freeze checks.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

}  // namespace cogen
