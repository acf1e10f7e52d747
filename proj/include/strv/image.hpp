#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace strv {

struct ImageSegment {
  std::uint32_t address = 0;
  std::vector<std::uint8_t> bytes;  // includes zero fill up to the memory size

  bool operator==(const ImageSegment&) const = default;
};

struct LoadedImage {
  std::vector<ImageSegment> segments;
  std::uint32_t entry = 0;
  bool from_elf = false;
};

bool is_elf(std::span<const std::uint8_t> bytes);

/// 32-bit little-endian RISC-V ELF: PT_LOAD segments placed at their
/// physical addresses, entry taken from the header. Throws ConfigError.
LoadedImage parse_elf(std::span<const std::uint8_t> bytes);

/// Raw binary or ELF, detected by the magic number. Raw images load at `base`
/// and start at `base`.
LoadedImage parse_image(std::span<const std::uint8_t> bytes, std::uint32_t base = 0);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
LoadedImage load_image_file(const std::filesystem::path& path, std::uint32_t base = 0);

}  // namespace strv
