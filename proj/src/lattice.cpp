#include "qca1d/lattice.hpp"

#include <algorithm>
#include <set>

namespace qca1d {

std::string geometry_name(Geometry g) {
  return g == Geometry::Interval ? "interval" : "circle";
}

Geometry geometry_from_name(const std::string& s) {
  if (s == "interval") return Geometry::Interval;
  if (s == "circle") return Geometry::Circle;
  throw Error(ErrorKind::InvalidInput, "unknown geometry: " + s);
}

Lattice::Lattice(Geometry geometry, std::vector<int> local_dims, long dim_cap)
    : geometry_(geometry), local_dims_(std::move(local_dims)), dim_cap_(dim_cap) {
  require(!local_dims_.empty(), ErrorKind::InvalidInput, "lattice needs sites");
  total_dim_ = 1;
  for (int d : local_dims_) {
    require(d >= 1, ErrorKind::InvalidInput, "local dims must be positive");
    require(total_dim_ <= dim_cap_ / d, ErrorKind::InvalidInput,
            "total dimension exceeds cap " + std::to_string(dim_cap_));
    total_dim_ *= d;
  }
}

int Lattice::distance(int x, int y) const {
  const int n = num_sites();
  require(x >= 0 && x < n && y >= 0 && y < n, ErrorKind::InvalidInput,
          "site out of range");
  int d = std::abs(x - y);
  if (geometry_ == Geometry::Circle) d = std::min(d, n - d);
  return d;
}

int Lattice::wrap(int label) const {
  const int n = num_sites();
  if (geometry_ == Geometry::Circle) return ((label % n) + n) % n;
  require(label >= 0 && label < n, ErrorKind::InvalidInput,
          "site label " + std::to_string(label) + " outside interval");
  return label;
}

bool Lattice::uniform_dims() const {
  return std::all_of(local_dims_.begin(), local_dims_.end(),
                     [&](int d) { return d == local_dims_[0]; });
}

Lattice Lattice::coarse_grain(int k) const {
  require(k >= 1, ErrorKind::InvalidInput, "coarse grain factor must be >= 1");
  const int n = num_sites();
  if (geometry_ == Geometry::Circle)
    require(n % k == 0, ErrorKind::InvalidInput,
            "circle size not divisible by coarse-grain factor");
  std::vector<int> dims;
  for (int i = 0; i < n; i += k) {
    long d = 1;
    for (int j = i; j < std::min(i + k, n); ++j) d *= local_dims_[j];
    dims.push_back(static_cast<int>(d));
  }
  return Lattice(geometry_, dims, dim_cap_);
}

bool Region::contains(int x) const {
  return std::find(sites.begin(), sites.end(), x) != sites.end();
}

long Region::dim(const Lattice& lat) const {
  long d = 1;
  for (int x : sites) d *= lat.local_dim(x);
  return d;
}

Region Region::range(const Lattice& lat, int a, int b) {
  require(b >= a, ErrorKind::InvalidInput, "empty region range");
  require(b - a < lat.num_sites(), ErrorKind::InvalidInput,
          "region range longer than lattice");
  std::vector<int> sites;
  for (int t = a; t <= b; ++t) sites.push_back(lat.wrap(t));
  std::set<int> uniq(sites.begin(), sites.end());
  require(uniq.size() == sites.size(), ErrorKind::InvalidInput,
          "region range wraps onto itself");
  return Region(sites);
}

Region Region::full(const Lattice& lat) {
  std::vector<int> sites(lat.num_sites());
  for (int i = 0; i < lat.num_sites(); ++i) sites[i] = i;
  return Region(sites);
}

Region neighborhood(const Lattice& lat, const Region& x, int r) {
  std::set<int> out;
  for (int y = 0; y < lat.num_sites(); ++y)
    for (int s : x.sites)
      if (lat.distance(s, y) <= r) {
        out.insert(y);
        break;
      }
  return Region(std::vector<int>(out.begin(), out.end()));
}

bool region_subset(const Region& a, const Region& b) {
  return std::all_of(a.sites.begin(), a.sites.end(),
                     [&](int s) { return b.contains(s); });
}

Region region_union(const Region& a, const Region& b) {
  std::set<int> out(a.sites.begin(), a.sites.end());
  out.insert(b.sites.begin(), b.sites.end());
  return Region(std::vector<int>(out.begin(), out.end()));
}

Region region_complement(const Lattice& lat, const Region& x) {
  std::vector<int> out;
  for (int y = 0; y < lat.num_sites(); ++y)
    if (!x.contains(y)) out.push_back(y);
  return Region(out);
}

}  // namespace qca1d
