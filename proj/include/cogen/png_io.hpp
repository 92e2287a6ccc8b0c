#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cogen {

struct Image8 {
    int height = 0, width = 0;
    std::vector<std::uint8_t> rgb;  // H*W*3
};

// 8-bit RGB PNG, no interlacing, filter 0 on write; the reader handles all
// five standard filters and RGBA input (alpha dropped). Lossy for the
// motion codec beyond the documented 8-bit guarantees.
void write_png(const Image8& img, const std::string& path);
Image8 read_png(const std::string& path);

}  // namespace cogen
