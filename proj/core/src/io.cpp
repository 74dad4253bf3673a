#include "chq/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace chq {

static_assert(std::endian::native == std::endian::little,
              "snapshot writer assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'C', 'H', 'Q', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t x) {
  os.write(reinterpret_cast<const char*>(&x), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
  std::uint32_t x = 0;
  is.read(reinterpret_cast<char*>(&x), 4);
  return x;
}
}  // namespace

void write_snapshot(const std::string& path, const Field& u) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open snapshot for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(u.grid.N));
  put_u32(os, static_cast<std::uint32_t>(u.grid.M));
  put_u32(os, static_cast<std::uint32_t>(u.grid.s));
  os.write(reinterpret_cast<const char*>(u.v.data()),
           static_cast<std::streamsize>(u.v.size() * sizeof(double)));
  if (!os) throw std::runtime_error("snapshot write failed: " + path);
}

Field read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open snapshot: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad snapshot magic: " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw std::runtime_error("unsupported snapshot version");
  const int N = static_cast<int>(get_u32(is));
  const int M = static_cast<int>(get_u32(is));
  const int s = static_cast<int>(get_u32(is));
  Field u(make_grid(N, M, s));
  is.read(reinterpret_cast<char*>(u.v.data()),
          static_cast<std::streamsize>(u.v.size() * sizeof(double)));
  if (!is) throw std::runtime_error("snapshot truncated: " + path);
  return u;
}

}  // namespace chq
