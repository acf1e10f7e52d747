#include "strv/image.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "strv/errors.hpp"

namespace strv {

namespace {

constexpr std::uint16_t kMachineRiscv = 243;
constexpr std::uint32_t kPtLoad = 1;

std::uint16_t u16(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 2 > b.size()) throw ConfigError("ELF file truncated");
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t u32(std::span<const std::uint8_t> b, std::size_t off) {
  if (off + 4 > b.size()) throw ConfigError("ELF file truncated");
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

}  // namespace

bool is_elf(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && bytes[0] == 0x7F && bytes[1] == 'E' && bytes[2] == 'L' && bytes[3] == 'F';
}

LoadedImage parse_elf(std::span<const std::uint8_t> b) {
  if (!is_elf(b)) throw ConfigError("not an ELF file");
  if (b.size() < 52) throw ConfigError("ELF header truncated");
  if (b[4] != 1) throw ConfigError("ELF file is not 32-bit");
  if (b[5] != 1) throw ConfigError("ELF file is not little-endian");
  if (u16(b, 18) != kMachineRiscv) throw ConfigError("ELF machine is not RISC-V");

  LoadedImage img;
  img.from_elf = true;
  img.entry = u32(b, 24);
  const std::uint32_t phoff = u32(b, 28);
  const std::uint16_t phentsize = u16(b, 42);
  const std::uint16_t phnum = u16(b, 44);
  if (phnum > 0 && phentsize < 32) throw ConfigError("ELF program header entries too small");
  for (std::uint16_t i = 0; i < phnum; ++i) {
    const std::size_t ph = phoff + static_cast<std::size_t>(i) * phentsize;
    if (u32(b, ph) != kPtLoad) continue;
    const std::uint32_t offset = u32(b, ph + 4);
    const std::uint32_t paddr = u32(b, ph + 12);
    const std::uint32_t filesz = u32(b, ph + 16);
    const std::uint32_t memsz = u32(b, ph + 20);
    if (memsz == 0) continue;
    if (filesz > memsz) throw ConfigError("ELF segment file size exceeds memory size");
    if (static_cast<std::uint64_t>(offset) + filesz > b.size()) throw ConfigError("ELF segment extends past end of file");
    ImageSegment seg;
    seg.address = paddr;
    seg.bytes.assign(b.begin() + offset, b.begin() + offset + filesz);
    seg.bytes.resize(memsz, 0);
    img.segments.push_back(std::move(seg));
  }
  if (img.segments.empty()) throw ConfigError("ELF file has no loadable segments");
  return img;
}

LoadedImage parse_image(std::span<const std::uint8_t> bytes, std::uint32_t base) {
  if (is_elf(bytes)) return parse_elf(bytes);
  LoadedImage img;
  img.entry = base;
  img.segments.push_back({base, std::vector<std::uint8_t>(bytes.begin(), bytes.end())});
  return img;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LoadedImage load_image_file(const std::filesystem::path& path, std::uint32_t base) {
  const auto bytes = read_file(path);
  return parse_image(bytes, base);
}

}  // namespace strv
