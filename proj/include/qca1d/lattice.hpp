#pragma once

#include <memory>

#include "qca1d/types.hpp"

namespace qca1d {

enum class Geometry { Interval, Circle };

std::string geometry_name(Geometry g);
Geometry geometry_from_name(const std::string& s);

// One-dimensional site lattice with per-site local dimensions.  Site ids run
// 0..n-1 in fixed order; all Kronecker embeddings use this order.
class Lattice {
 public:
  Lattice(Geometry geometry, std::vector<int> local_dims, long dim_cap = 4096);

  Geometry geometry() const { return geometry_; }
  int num_sites() const { return static_cast<int>(local_dims_.size()); }
  int local_dim(int x) const { return local_dims_.at(x); }
  const std::vector<int>& local_dims() const { return local_dims_; }
  long total_dim() const { return total_dim_; }
  long dim_cap() const { return dim_cap_; }

  // Arc distance on circles, |x-y| on intervals.
  int distance(int x, int y) const;
  // Maps an integer label onto a site id: mod n on circles, identity (with
  // bounds check) on intervals.
  int wrap(int label) const;

  bool uniform_dims() const;

  // Group k consecutive sites into one; n must be divisible by k on circles.
  Lattice coarse_grain(int k) const;

 private:
  Geometry geometry_;
  std::vector<int> local_dims_;
  long total_dim_;
  long dim_cap_;
};

// Subset of sites, stored in the order used for local-operator factors.
struct Region {
  std::vector<int> sites;

  Region() = default;
  explicit Region(std::vector<int> s) : sites(std::move(s)) {}

  int size() const { return static_cast<int>(sites.size()); }
  bool contains(int x) const;
  long dim(const Lattice& lat) const;

  // Contiguous label range [a,b]; wraps on circles.
  static Region range(const Lattice& lat, int a, int b);
  static Region single(int x) { return Region({x}); }
  static Region full(const Lattice& lat);
};

// {y : dist(x,y) <= r for some x in X}; sorted by site id.
Region neighborhood(const Lattice& lat, const Region& x, int r);

bool region_subset(const Region& a, const Region& b);
Region region_union(const Region& a, const Region& b);
Region region_complement(const Lattice& lat, const Region& x);

}  // namespace qca1d
