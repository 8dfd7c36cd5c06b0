#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lselab {

/// A lattice site: integer coordinates, one entry per dimension.
using Site = std::vector<int>;

/// l^infinity distance between two sites of equal dimension.
int linf(const Site& a, const Site& b);

/// Finite set of sites, all of the same dimension, kept sorted and
/// duplicate-free so iteration order is deterministic.
class Region {
 public:
  Region(int dim, std::vector<Site> sites);

  static Region empty(int dim) { return Region(dim, {}); }
  static Region single(Site s);
  /// d = 1 interval [lo, hi].
  static Region interval(int lo, int hi);
  /// Axis-aligned box of sites lo <= x <= hi, componentwise.
  static Region box(const Site& lo, const Site& hi);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(sites_.size()); }
  bool is_empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(int i) const { return sites_[static_cast<size_t>(i)]; }

  bool contains(const Site& s) const;
  /// Index of s in the sorted site list, or -1.
  int index_of(const Site& s) const;

  /// Sites at l^inf distance in [1, r] from this region (the r-halo).
  Region halo(int r) const;
  /// This region together with its r-halo.
  Region grown(int r) const;

  Region unite(const Region& other) const;
  Region intersect(const Region& other) const;
  Region subtract(const Region& other) const;
  bool is_subset_of(const Region& other) const;

  bool operator==(const Region& other) const {
    return dim_ == other.dim_ && sites_ == other.sites_;
  }

 private:
  int dim_;
  std::vector<Site> sites_;
};

/// min over site pairs of the l^inf distance. Throws on empty input.
int dist(const Region& a, const Region& b);
int dist(const Site& s, const Region& b);
/// max over site pairs within one region (0 for singletons).
int diam(const Region& a);

/// The 2^d staggered collections of cubes that cover the lattice.
///
/// Base cube X0 = [0, 2(L+R)]^d. Collection s places copies of X0 at
/// k in 2(L+2R)Z^d + (L+2R)v_s, where v_s is the binary vector of s.
/// Within one collection, cubes are disjoint with pairwise distance 2R
/// (asserted >= 2R); cubes of different collections overlap in boxes
/// whose shortest edge spans L.
class CubePartition {
 public:
  CubePartition(int d, int L, int R);

  int dim() const { return d_; }
  int cube_extent() const { return 2 * (L_ + R_); }  // sites 0..extent per axis
  int period() const { return 2 * (L_ + 2 * R_); }
  int collections() const { return 1 << d_; }
  int L() const { return L_; }
  int R() const { return R_; }

  /// Binary offset vector v_s scaled by (L + 2R).
  Site shift(int s) const;

  /// All cubes of collection s that intersect the box [lo, hi].
  std::vector<Region> cubes_in_window(int s, const Site& lo, const Site& hi) const;

  /// The unique cube of collection s containing the site, if any.
  std::optional<Region> cube_containing(int s, const Site& site) const;

 private:
  Region cube_at(const Site& k) const;
  int d_, L_, R_;
};

}  // namespace lselab
