#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rbmcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Default size limit for exhaustive enumeration over index subsets.
inline constexpr int kExhaustiveLimit = 20;

// Strictly increasing list of indices into {0, ..., parent_dim - 1}.
// Stored zero-based; reports and JSON use one-based indices.
class IndexSubset {
 public:
  IndexSubset() = default;
  IndexSubset(int parent_dim, std::vector<int> indices);

  // Subset encoded by the bits of `mask` (bit i set <=> index i present).
  static IndexSubset from_mask(int parent_dim, unsigned long mask);
  static IndexSubset full(int parent_dim);

  int parent_dim() const { return parent_dim_; }
  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool contains(int i) const;
  unsigned long mask() const;

  std::vector<int> one_based() const;
  std::string to_string() const;

  friend bool operator==(const IndexSubset& a, const IndexSubset& b) {
    return a.parent_dim_ == b.parent_dim_ && a.indices_ == b.indices_;
  }
  // Lexicographic order by sorted index list.
  friend bool operator<(const IndexSubset& a, const IndexSubset& b) {
    return a.indices_ < b.indices_;
  }

 private:
  int parent_dim_ = 0;
  std::vector<int> indices_;
};

// Throws InputError unless `m` is square with finite entries.
void require_square_finite(const Matrix& m, const std::string& name);
void require_finite(const Vector& v, const std::string& name);

// Restriction of a vector to the index subset.
Vector restrict(const Vector& x, const IndexSubset& subset);

// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol);

}  // namespace rbmcert
