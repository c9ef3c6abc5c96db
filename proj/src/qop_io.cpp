#include "qca1d/qop_io.hpp"

#include <cstring>
#include <fstream>

namespace qca1d {

namespace {

template <typename T>
void write_raw(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::InvalidInput, "QOP1: truncated file");
  return v;
}

}  // namespace

void write_qop(const std::string& path, const QopFile& file) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::InvalidInput, "cannot open for write: " + path);
  out.write("QOP1", 4);
  write_raw<std::uint32_t>(out, 1);
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(file.dims.size()));
  long D = 1;
  for (int d : file.dims) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    D *= d;
  }
  write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(file.matrices.size()));
  for (const Mat& m : file.matrices) {
    require(m.rows() == D && m.cols() == D, ErrorKind::InvalidInput,
            "QOP1: matrix shape does not match dims");
    for (long i = 0; i < D; ++i)
      for (long j = 0; j < D; ++j) {
        write_raw<double>(out, m(i, j).real());
        write_raw<double>(out, m(i, j).imag());
      }
  }
  require(out.good(), ErrorKind::InvalidInput, "write failed: " + path);
}

QopFile read_qop(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::InvalidInput, "cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, "QOP1", 4) == 0,
          ErrorKind::InvalidInput, "not a QOP1 file: " + path);
  auto version = read_raw<std::uint32_t>(in);
  require(version == 1, ErrorKind::InvalidInput, "unsupported QOP1 version");
  auto nsites = read_raw<std::uint32_t>(in);
  require(nsites > 0 && nsites < 64, ErrorKind::InvalidInput,
          "QOP1: implausible site count");
  QopFile file;
  long D = 1;
  for (std::uint32_t i = 0; i < nsites; ++i) {
    auto d = read_raw<std::uint32_t>(in);
    require(d >= 1 && D * static_cast<long>(d) <= (1L << 20),
            ErrorKind::InvalidInput, "QOP1: implausible dims");
    file.dims.push_back(static_cast<int>(d));
    D *= d;
  }
  auto count = read_raw<std::uint64_t>(in);
  require(count <= (1u << 20), ErrorKind::InvalidInput,
          "QOP1: implausible matrix count");
  for (std::uint64_t k = 0; k < count; ++k) {
    Mat m(D, D);
    for (long i = 0; i < D; ++i)
      for (long j = 0; j < D; ++j) {
        double re = read_raw<double>(in);
        double im = read_raw<double>(in);
        m(i, j) = Complex(re, im);
      }
    file.matrices.push_back(std::move(m));
  }
  return file;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::InvalidInput, "cannot open: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace qca1d
