#pragma once

#include <string>

#include "qca1d/lattice.hpp"
#include "qca1d/types.hpp"

namespace qca1d {

// "QOP1" container: magic, u32 version=1, u32 site count, per-site u32 dims,
// u64 matrix count, then row-major little-endian interleaved (re, im)
// float64 payloads.  Matrices are D x D with D the product of the dims.
struct QopFile {
  std::vector<int> dims;
  std::vector<Mat> matrices;
};

void write_qop(const std::string& path, const QopFile& file);
QopFile read_qop(const std::string& path);

// FNV-1a 64-bit digest of a file's bytes, hex-encoded.
std::string file_digest(const std::string& path);

}  // namespace qca1d
