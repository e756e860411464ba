#include "benson/polyhedron.hpp"

#include "benson/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace benson {

namespace {

int numeric_rank(const std::vector<Vec>& vectors, int dim, double tol) {
  if (vectors.empty()) {
    return 0;
  }
  Mat m(static_cast<Eigen::Index>(vectors.size()), dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

bool near(const Vec& a, const Vec& b, double tol) { return (a - b).lpNorm<Eigen::Infinity>() <= tol; }

void sort_and_merge(std::vector<Vec>& points, double tol) {
  std::sort(points.begin(), points.end(), lex_less);
  std::vector<Vec> out;
  out.reserve(points.size());
  for (auto& p : points) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Vec& q) { return near(p, q, tol); });
    if (!dup) {
      out.push_back(std::move(p));
    }
  }
  points = std::move(out);
}

// Homogeneous row (n, -b) for n'y >= b, so that (y, 1) satisfies row'(y, 1) >= 0.
Vec homogenize(const HalfSpace& h) {
  Vec row(h.normal.size() + 1);
  row.head(h.normal.size()) = h.normal;
  row(h.normal.size()) = -h.offset;
  return row;
}

VRep extract_vrep(const detail::ConeDD& dd, int dim, const GeometryTolerances& tol) {
  if (!dd.lineality().empty()) {
    throw LineError("polyhedron contains a line (lineality dimension " +
                    std::to_string(dd.lineality().size()) + ")");
  }
  VRep out;
  const auto& rows = dd.constraints();
  for (std::size_t i = 0; i < dd.num_rays(); ++i) {
    const Vec& r = dd.ray(i);
    const double s = r(dim);
    if (s > tol.zero) {
      Vec v = r.head(dim) / s;
      // Re-solve the tight system: rays built by repeated combination drift.
      std::vector<Eigen::Index> tight;
      const auto& zero = dd.zero_set(i);
      for (std::size_t k = zero.find_first(); k != boost::dynamic_bitset<>::npos; k = zero.find_next(k)) {
        if (rows[k].head(dim).norm() > tol.zero) {
          tight.push_back(static_cast<Eigen::Index>(k));
        }
      }
      if (static_cast<int>(tight.size()) >= dim) {
        Mat a(static_cast<Eigen::Index>(tight.size()), dim);
        Vec b(static_cast<Eigen::Index>(tight.size()));
        for (std::size_t j = 0; j < tight.size(); ++j) {
          const Vec& row = rows[static_cast<std::size_t>(tight[j])];
          a.row(static_cast<Eigen::Index>(j)) = row.head(dim).transpose();
          b(static_cast<Eigen::Index>(j)) = -row(dim);
        }
        Eigen::ColPivHouseholderQR<Mat> qr(a);
        if (qr.rank() == dim) {
          Vec polished = qr.solve(b);
          if (polished.allFinite() && near(polished, v, 1e-6 * (1.0 + v.lpNorm<Eigen::Infinity>()))) {
            v = polished;
          }
        }
      }
      out.vertices.push_back(std::move(v));
    } else {
      Vec y = r.head(dim);
      const double n = y.norm();
      if (n > tol.zero) {
        out.rays.push_back(y / n);
      }
    }
  }
  if (out.vertices.empty()) {
    throw EmptyError("polyhedron is empty");
  }
  sort_and_merge(out.vertices, tol.dup);
  sort_and_merge(out.rays, tol.dup);
  return out;
}

}  // namespace

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

HalfSpace make_halfspace(const Vec& normal, double offset, double tol_zero) {
  const double n = normal.norm();
  if (!(n > tol_zero)) {
    throw ZeroNormalError("halfspace normal has norm " + std::to_string(n));
  }
  return HalfSpace{normal / n, offset / n};
}

bool HRep::contains(const Vec& y, double tol) const { return min_slack(y) >= -tol; }

double HRep::min_slack(const Vec& y) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& h : halfspaces) {
    m = std::min(m, h.slack(y));
  }
  return m;
}

namespace detail {

ConeDD::ConeDD(int dim, double tol) : dim_(dim), tol_(tol) {
  for (int i = 0; i < dim; ++i) {
    lineality_.push_back(Vec::Unit(dim, i));
  }
}

void ConeDD::absorb_into_lineality(const Vec& a, std::size_t pivot) {
  Vec l = lineality_[pivot];
  double al = a.dot(l);
  if (al < 0) {
    l = -l;
    al = -al;
  }
  lineality_.erase(lineality_.begin() + static_cast<std::ptrdiff_t>(pivot));
  for (auto& other : lineality_) {
    other -= (a.dot(other) / al) * l;
  }
  const std::size_t idx = constraints_.size() - 1;
  for (auto& r : rays_) {
    r.dir -= (a.dot(r.dir) / al) * l;
    r.dir.normalize();
    r.zero.set(idx);
  }
  Ray fresh{l.normalized(), boost::dynamic_bitset<>(constraints_.size())};
  for (std::size_t k = 0; k < idx; ++k) {
    fresh.zero.set(k);
  }
  rays_.push_back(std::move(fresh));
}

bool ConeDD::adjacent(std::size_t p, std::size_t n, const boost::dynamic_bitset<>& common) const {
  for (std::size_t r = 0; r < rays_.size(); ++r) {
    if (r != p && r != n && common.is_subset_of(rays_[r].zero)) {
      return false;
    }
  }
  return true;
}

void ConeDD::add_constraint(const Vec& row) {
  Vec a = row;
  const double norm = a.norm();
  if (norm > 0) {
    a /= norm;
  }
  constraints_.push_back(a);
  const std::size_t idx = constraints_.size() - 1;
  for (auto& r : rays_) {
    r.zero.resize(constraints_.size());
  }

  if (!lineality_.empty()) {
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < lineality_.size(); ++i) {
      const double v = std::abs(a.dot(lineality_[i]));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best > tol_) {
      absorb_into_lineality(a, pivot);
      return;
    }
  }

  std::vector<double> vals(rays_.size());
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    vals[i] = a.dot(rays_[i].dir);
    if (vals[i] > tol_) {
      pos.push_back(i);
    } else if (vals[i] < -tol_) {
      neg.push_back(i);
    } else {
      rays_[i].zero.set(idx);
    }
  }
  if (neg.empty()) {
    return;
  }

  const std::size_t needed = static_cast<std::size_t>(std::max(0, dim_ - static_cast<int>(lineality_.size()) - 2));
  std::vector<Ray> fresh;
  for (std::size_t p : pos) {
    for (std::size_t n : neg) {
      boost::dynamic_bitset<> common = rays_[p].zero & rays_[n].zero;
      if (common.count() < needed || !adjacent(p, n, common)) {
        continue;
      }
      Vec dir = vals[p] * rays_[n].dir - vals[n] * rays_[p].dir;
      const double len = dir.norm();
      if (!(len > 0)) {
        continue;
      }
      dir /= len;
      common.set(idx);
      fresh.push_back(Ray{std::move(dir), std::move(common)});
    }
  }

  std::vector<Ray> kept;
  kept.reserve(rays_.size() - neg.size() + fresh.size());
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    if (vals[i] >= -tol_) {
      kept.push_back(std::move(rays_[i]));
    }
  }
  for (auto& f : fresh) {
    auto same = std::find_if(kept.begin(), kept.end(), [&](const Ray& k) { return near(k.dir, f.dir, tol_); });
    if (same != kept.end()) {
      same->zero |= f.zero;
      ++merged_;
    } else {
      kept.push_back(std::move(f));
    }
  }
  rays_ = std::move(kept);
}

}  // namespace detail

VRep enumerate_vertices(const HRep& hrep, int dim, const GeometryTolerances& tol) {
  detail::ConeDD dd(dim + 1, tol.dup);
  dd.add_constraint(Vec::Unit(dim + 1, dim));
  for (const auto& h : hrep.halfspaces) {
    dd.add_constraint(homogenize(h));
  }
  return extract_vrep(dd, dim, tol);
}

HRep remove_redundant(const HRep& hrep, const VRep& vrep, const GeometryTolerances& tol) {
  if (hrep.halfspaces.empty() || vrep.vertices.empty()) {
    return hrep;
  }
  const int dim = static_cast<int>(vrep.vertices.front().size());
  std::vector<Vec> generators;
  for (const auto& v : vrep.vertices) {
    Vec g(dim + 1);
    g << v, 1.0;
    generators.push_back(std::move(g));
  }
  for (const auto& r : vrep.rays) {
    Vec g(dim + 1);
    g << r, 0.0;
    generators.push_back(std::move(g));
  }
  const int poly_rank = numeric_rank(generators, dim + 1, 1e-9);

  HRep out;
  std::vector<boost::dynamic_bitset<>> seen;
  for (const auto& h : hrep.halfspaces) {
    boost::dynamic_bitset<> tight_set(generators.size());
    std::vector<Vec> tight;
    for (std::size_t i = 0; i < generators.size(); ++i) {
      const bool is_vertex = i < vrep.vertices.size();
      const double value = is_vertex ? h.slack(vrep.vertices[i]) : h.normal.dot(vrep.rays[i - vrep.vertices.size()]);
      const double scale = is_vertex ? 1.0 + std::abs(h.offset) : 1.0;
      if (std::abs(value) <= tol.support * scale) {
        tight.push_back(generators[i]);
        tight_set.set(i);
      }
    }
    const int r = numeric_rank(tight, dim + 1, 1e-9);
    if (r < poly_rank - 1 || tight.empty()) {
      continue;
    }
    if (std::find(seen.begin(), seen.end(), tight_set) != seen.end() && r != poly_rank) {
      continue;
    }
    seen.push_back(tight_set);
    out.halfspaces.push_back(h);
  }
  return out;
}

HRep hull(const VRep& vrep, int dim, const GeometryTolerances& tol) {
  if (vrep.vertices.empty()) {
    throw EmptyError("hull of an empty generator set");
  }
  detail::ConeDD dd(dim + 1, tol.dup);
  for (const auto& v : vrep.vertices) {
    Vec g(dim + 1);
    g << v, 1.0;
    dd.add_constraint(g);
  }
  for (const auto& r : vrep.rays) {
    Vec g(dim + 1);
    g << r, 0.0;
    dd.add_constraint(g);
  }
  HRep out;
  auto push = [&](const Vec& d) {
    const Vec n = d.head(dim);
    if (n.norm() <= 1e-9 * d.norm()) {
      return;  // the face at infinity
    }
    HalfSpace h = make_halfspace(n, -d(dim), tol.zero);
    const bool dup = std::any_of(out.halfspaces.begin(), out.halfspaces.end(), [&](const HalfSpace& o) {
      return near(o.normal, h.normal, tol.dup) && std::abs(o.offset - h.offset) <= tol.dup * (1.0 + std::abs(h.offset));
    });
    if (!dup) {
      out.halfspaces.push_back(std::move(h));
    }
  };
  for (std::size_t i = 0; i < dd.num_rays(); ++i) {
    push(dd.ray(i));
  }
  for (const auto& l : dd.lineality()) {
    push(l);
    push(-l);
  }
  return out;
}

Polyhedron::Polyhedron(int dim, GeometryTolerances tol) : dim_(dim), tol_(tol), dd_(dim + 1, tol.dup) {
  dd_.add_constraint(Vec::Unit(dim + 1, dim));
}

Polyhedron::Polyhedron(int dim, const HRep& hrep, GeometryTolerances tol) : Polyhedron(dim, tol) {
  for (const auto& h : hrep.halfspaces) {
    add_halfspace(h);
  }
}

Polyhedron Polyhedron::from_vrep(const VRep& vrep, int dim, GeometryTolerances tol) {
  return Polyhedron(dim, hull(vrep, dim, tol), tol);
}

bool Polyhedron::add_halfspace(const HalfSpace& h) {
  if (h.normal.size() != dim_) {
    throw std::invalid_argument("halfspace dimension mismatch");
  }
  const HalfSpace u = make_halfspace(h.normal, h.offset, tol_.zero);
  for (const auto& o : hrep_.halfspaces) {
    if (near(o.normal, u.normal, tol_.dup) && std::abs(o.offset - u.offset) <= tol_.dup * (1.0 + std::abs(u.offset))) {
      return false;
    }
  }
  hrep_.halfspaces.push_back(u);
  dirty_ = true;
  return true;
}

const VRep& Polyhedron::vrep() {
  if (dirty_) {
    rebuild_vrep();
  }
  return vrep_;
}

const VRep& Polyhedron::cached_vrep() const {
  if (dirty_) {
    throw std::logic_error("V-representation is stale");
  }
  return vrep_;
}

void Polyhedron::rebuild_vrep() {
  for (; applied_ < hrep_.halfspaces.size(); ++applied_) {
    dd_.add_constraint(homogenize(hrep_.halfspaces[applied_]));
  }
  vrep_ = extract_vrep(dd_, dim_, tol_);
  dirty_ = false;
}

void Polyhedron::reduce() {
  const VRep& v = vrep();
  hrep_ = remove_redundant(hrep_, v, tol_);
  applied_ = hrep_.halfspaces.size();
}

}  // namespace benson
