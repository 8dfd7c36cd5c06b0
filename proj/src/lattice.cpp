#include "lselab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace lselab {

int linf(const Site& a, const Site& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  int m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Region::Region(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {
  if (dim_ < 1) throw std::invalid_argument("dimension must be >= 1");
  for (const auto& s : sites_)
    if (static_cast<int>(s.size()) != dim_) throw std::invalid_argument("site dimension mismatch");
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

Region Region::single(Site s) {
  int d = static_cast<int>(s.size());
  return Region(d, {std::move(s)});
}

Region Region::interval(int lo, int hi) {
  std::vector<Site> sites;
  for (int i = lo; i <= hi; ++i) sites.push_back({i});
  return Region(1, std::move(sites));
}

Region Region::box(const Site& lo, const Site& hi) {
  int d = static_cast<int>(lo.size());
  if (hi.size() != lo.size()) throw std::invalid_argument("corner dimension mismatch");
  std::vector<Site> sites;
  Site cur = lo;
  while (true) {
    sites.push_back(cur);
    int axis = d - 1;
    while (axis >= 0) {
      if (++cur[axis] <= hi[axis]) break;
      cur[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return Region(d, std::move(sites));
}

bool Region::contains(const Site& s) const {
  return std::binary_search(sites_.begin(), sites_.end(), s);
}

int Region::index_of(const Site& s) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it == sites_.end() || *it != s) return -1;
  return static_cast<int>(it - sites_.begin());
}

Region Region::halo(int r) const {
  std::vector<Site> out;
  Site off(dim_, -r);
  for (const auto& s : sites_) {
    std::fill(off.begin(), off.end(), -r);
    while (true) {
      Site cand(dim_);
      for (int i = 0; i < dim_; ++i) cand[i] = s[i] + off[i];
      if (!contains(cand)) out.push_back(cand);
      int axis = dim_ - 1;
      while (axis >= 0) {
        if (++off[axis] <= r) break;
        off[axis] = -r;
        --axis;
      }
      if (axis < 0) break;
    }
  }
  return Region(dim_, std::move(out));
}

Region Region::grown(int r) const { return unite(halo(r)); }

Region Region::unite(const Region& other) const {
  std::vector<Site> all = sites_;
  all.insert(all.end(), other.sites_.begin(), other.sites_.end());
  return Region(dim_, std::move(all));
}

Region Region::intersect(const Region& other) const {
  std::vector<Site> out;
  std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                        std::back_inserter(out));
  return Region(dim_, std::move(out));
}

Region Region::subtract(const Region& other) const {
  std::vector<Site> out;
  std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                      std::back_inserter(out));
  return Region(dim_, std::move(out));
}

bool Region::is_subset_of(const Region& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
}

int dist(const Region& a, const Region& b) {
  if (a.is_empty() || b.is_empty()) throw std::invalid_argument("empty region");
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  int best = linf(a.sites().front(), b.sites().front());
  for (const auto& sa : a.sites())
    for (const auto& sb : b.sites()) best = std::min(best, linf(sa, sb));
  return best;
}

int dist(const Site& s, const Region& b) { return dist(Region::single(s), b); }

int diam(const Region& a) {
  if (a.is_empty()) throw std::invalid_argument("empty region");
  int best = 0;
  for (const auto& sa : a.sites())
    for (const auto& sb : a.sites()) best = std::max(best, linf(sa, sb));
  return best;
}

CubePartition::CubePartition(int d, int L, int R) : d_(d), L_(L), R_(R) {
  if (d < 1 || L < 1 || R < 1) throw std::invalid_argument("d, L, R must be >= 1");
}

Site CubePartition::shift(int s) const {
  if (s < 0 || s >= collections()) throw std::invalid_argument("collection index out of range");
  Site v(d_);
  for (int n = 0; n < d_; ++n) v[n] = ((s >> n) & 1) * (L_ + 2 * R_);
  return v;
}

Region CubePartition::cube_at(const Site& k) const {
  Site hi(d_);
  for (int i = 0; i < d_; ++i) hi[i] = k[i] + cube_extent();
  return Region::box(k, hi);
}

std::vector<Region> CubePartition::cubes_in_window(int s, const Site& lo, const Site& hi) const {
  const Site off = shift(s);
  const int p = period();
  // Per axis: anchors k = p*m + off with k <= hi and k + extent >= lo.
  std::vector<std::vector<int>> axis_anchors(static_cast<size_t>(d_));
  for (int i = 0; i < d_; ++i) {
    int kmin = lo[i] - cube_extent();
    int kmax = hi[i];
    // smallest m with p*m + off >= kmin
    int m0 = static_cast<int>(std::floor(static_cast<double>(kmin - off[i]) / p));
    for (int m = m0; p * m + off[i] <= kmax; ++m) {
      int k = p * m + off[i];
      if (k >= kmin) axis_anchors[static_cast<size_t>(i)].push_back(k);
    }
  }
  std::vector<Region> cubes;
  std::vector<size_t> idx(static_cast<size_t>(d_), 0);
  for (const auto& a : axis_anchors)
    if (a.empty()) return cubes;
  while (true) {
    Site k(d_);
    for (int i = 0; i < d_; ++i) k[i] = axis_anchors[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
    cubes.push_back(cube_at(k));
    int axis = d_ - 1;
    while (axis >= 0) {
      if (++idx[static_cast<size_t>(axis)] < axis_anchors[static_cast<size_t>(axis)].size()) break;
      idx[static_cast<size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return cubes;
}

std::optional<Region> CubePartition::cube_containing(int s, const Site& site) const {
  const Site off = shift(s);
  const int p = period();
  Site k(d_);
  for (int i = 0; i < d_; ++i) {
    int rel = site[i] - off[i];
    int m = static_cast<int>(std::floor(static_cast<double>(rel) / p));
    int within = rel - p * m;
    if (within > cube_extent()) return std::nullopt;
    k[i] = p * m + off[i];
  }
  return cube_at(k);
}

}  // namespace lselab
