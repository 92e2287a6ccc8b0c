#include "cogen/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace cogen {

namespace {

constexpr char kMagic[4] = {'C', 'G', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw DataError(std::string("truncated container: ") + what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is, const char* what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw DataError(std::string("truncated container: ") + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

Tensor TensorContainer::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw DataError("container tensor not found: " + name);
}

bool TensorContainer::contains(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return true;
    return false;
}

void write_container(const TensorContainer& c, const std::string& path) {
    // Write to a temp file then rename so readers never see partial output.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("cannot open for writing: " + tmp);
        os.write(kMagic, 4);
        put_u32(os, kVersion);
        put_u32(os, static_cast<std::uint32_t>(c.meta.size()));
        for (const auto& [k, v] : c.meta) {
            put_u32(os, static_cast<std::uint32_t>(k.size()));
            os.write(k.data(), static_cast<std::streamsize>(k.size()));
            put_u64(os, v);
        }
        put_u32(os, static_cast<std::uint32_t>(c.tensors.size()));
        for (const auto& [name, t] : c.tensors) {
            put_u32(os, static_cast<std::uint32_t>(name.size()));
            os.write(name.data(), static_cast<std::streamsize>(name.size()));
            put_u32(os, static_cast<std::uint32_t>(t.ndim()));
            for (int i = 0; i < t.ndim(); ++i) put_u64(os, static_cast<std::uint64_t>(t.dim(i)));
        }
        for (const auto& [name, t] : c.tensors) {
            (void)name;
            os.write(reinterpret_cast<const char*>(t.data()),
                     static_cast<std::streamsize>(t.numel() * 8));
        }
        if (!os) throw DataError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw DataError("rename failed: " + path);
}

TensorContainer read_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open container: " + path);
    char magic[4];
    if (!is.read(magic, 4)) throw DataError("truncated container: magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("bad container magic in " + path);
    const std::uint32_t version = get_u32(is, "version");
    if (version != kVersion)
        throw DataError("unsupported container version " + std::to_string(version));

    TensorContainer c;
    const std::uint32_t n_meta = get_u32(is, "meta count");
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        const std::uint32_t klen = get_u32(is, "meta key length");
        std::string key(klen, '\0');
        if (!is.read(key.data(), klen)) throw DataError("truncated container: meta key");
        c.meta[key] = get_u64(is, "meta value");
    }
    const std::uint32_t n_tensors = get_u32(is, "tensor count");
    std::vector<std::pair<std::string, Shape>> manifest;
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::uint32_t nlen = get_u32(is, "tensor name length");
        std::string name(nlen, '\0');
        if (!is.read(name.data(), nlen)) throw DataError("truncated container: tensor name");
        const std::uint32_t ndim = get_u32(is, "tensor rank");
        Shape shape(ndim);
        for (std::uint32_t d = 0; d < ndim; ++d)
            shape[d] = static_cast<std::int64_t>(get_u64(is, "tensor dim"));
        manifest.emplace_back(std::move(name), std::move(shape));
    }
    for (auto& [name, shape] : manifest) {
        const std::int64_t n = shape_numel(shape);
        std::vector<double> data(static_cast<std::size_t>(n));
        if (!is.read(reinterpret_cast<char*>(data.data()), n * 8))
            throw DataError("truncated container payload at tensor '" + name + "'");
        c.tensors.emplace_back(name, Tensor::from(shape, std::move(data)));
    }
    return c;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const auto got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace cogen
