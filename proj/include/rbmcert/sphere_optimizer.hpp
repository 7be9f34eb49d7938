#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rbmcert/cone.hpp"

namespace rbmcert {

struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct SphereSearchOptions {
  int starts = 32;
  int grid_points = 100000;
  int grid_max_dim = 4;       // dense grid only for sections of dim <= this
  double agreement_tol = 1e-4;
  int max_iter = 4000;
};

struct SphereExtremum {
  bool empty = false;      // the section contains no unit vector
  double value = 0.0;
  Vector argmin;           // in ambient coordinates
  bool converged = false;  // the winning local search terminated normally
  bool grid_used = false;
  double grid_value = 0.0;
  double multistart_value = 0.0;
  bool flagged = false;    // multi-start and grid disagree beyond tolerance
};

// {x in D : n_j . x = 0 for j in `equality_faces`, |x| = 1}, parametrized by
// an orthonormal basis of the equality subspace.
class SphereSection {
 public:
  explicit SphereSection(const PolyhedralCone& cone,
                         const std::vector<int>& equality_faces = {});

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }

  // Nearest point of the section to the ray through y (subspace coordinates);
  // empty vector if y lies in the polar cone.
  Vector project(const Vector& y) const;

  // Deterministic feasible starting points in subspace coordinates.
  std::vector<Vector> starts(int count) const;

  // Quasi-random points of the section (columns, subspace coordinates),
  // computed once per section.
  const Matrix& grid(int count) const;

  bool empty() const { return starts(1).empty(); }

 private:
  Matrix basis_;        // d x k orthonormal
  Matrix constraints_;  // rows g with g . y >= 0
  Matrix gram_;         // constraints_ constraints_'
  struct GridCache;
  std::shared_ptr<GridCache> grid_cache_;
};

SphereExtremum minimize_on_sphere(const SphereSection& section, const Objective& f,
                                  const SphereSearchOptions& options = {});
SphereExtremum maximize_on_sphere(const SphereSection& section, const Objective& f,
                                  const SphereSearchOptions& options = {});

// Low-discrepancy points: the n-th Halton point in [0,1)^dim.
Vector halton_point(long index, int dim);

// Unit vectors from Halton points through Box-Muller; n points as columns.
Matrix quasi_random_directions(int dim, int count, long offset = 1);

}  // namespace rbmcert
