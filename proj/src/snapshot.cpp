#include <cstring>
#include <fstream>

#include "ictk/spectral.hpp"

namespace ictk {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(u >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  double d;
  std::memcpy(&d, &u, 8);
  return d;
}

}  // namespace

void write_snapshot(const std::string& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  const Grid2D& g = f.grid();
  const int n = g.n();
  os.write("CFF1", 4);
  put_u32(os, static_cast<std::uint32_t>(n));
  put_u32(os, static_cast<std::uint32_t>(n));
  const char tag = static_cast<char>(f.rank());
  os.write(&tag, 1);
  // components outermost, then xi1 from -n/2, then xi2 from -n/2
  for (int c = 0; c < f.ncomp(); ++c) {
    for (int m1 = -n / 2; m1 < n / 2; ++m1) {
      for (int m2 = -n / 2; m2 < n / 2; ++m2) {
        const cplx z = f.at(c, g.index(m1), g.index(m2));
        put_f64(os, z.real());
        put_f64(os, z.imag());
      }
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

SpectralField read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "CFF1", 4) != 0) throw std::runtime_error("not a CFF1 snapshot: " + path);
  const std::uint32_t nx = get_u32(is), ny = get_u32(is);
  char tag = 0;
  is.read(&tag, 1);
  if (nx != ny) throw std::runtime_error("CFF1: non-square grid");
  if (tag < 0 || tag > 2) throw std::runtime_error("CFF1: bad rank tag");
  const Grid2D g(static_cast<int>(nx));
  SpectralField f(g, static_cast<Rank>(tag));
  const int n = g.n();
  for (int c = 0; c < f.ncomp(); ++c) {
    for (int m1 = -n / 2; m1 < n / 2; ++m1) {
      for (int m2 = -n / 2; m2 < n / 2; ++m2) {
        const double re = get_f64(is), im = get_f64(is);
        f.at(c, g.index(m1), g.index(m2)) = cplx(re, im);
      }
    }
  }
  if (!is) throw std::runtime_error("CFF1: truncated file " + path);
  return f;
}

}  // namespace ictk
