#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace chartkit::synth {

struct ImageInfo {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

// 8-bit RGB, rows top to bottom. Throws Error on I/O failure.
void write_png_rgb(const std::string& path, std::uint32_t width, std::uint32_t height,
                   std::span<const std::uint8_t> rgb);

// Fully decodes the file; nullopt if it is missing, truncated or not a PNG.
std::optional<ImageInfo> decode_png(const std::string& path);

}  // namespace chartkit::synth
