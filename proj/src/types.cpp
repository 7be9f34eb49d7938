#include "rbmcert/types.hpp"

#include <cmath>
#include <sstream>

#include "rbmcert/errors.hpp"

namespace rbmcert {

IndexSubset::IndexSubset(int parent_dim, std::vector<int> indices)
    : parent_dim_(parent_dim), indices_(std::move(indices)) {
  if (parent_dim_ <= 0) {
    throw InputError("index subset: parent dimension must be positive");
  }
  if (indices_.empty()) {
    throw InputError("index subset must be nonempty");
  }
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] < 0 || indices_[k] >= parent_dim_) {
      throw InputError("index subset: index " + std::to_string(indices_[k] + 1) +
                       " outside [1, " + std::to_string(parent_dim_) + "]");
    }
    if (k > 0 && indices_[k] <= indices_[k - 1]) {
      throw InputError("index subset must be strictly increasing");
    }
  }
}

IndexSubset IndexSubset::from_mask(int parent_dim, unsigned long mask) {
  std::vector<int> idx;
  for (int i = 0; i < parent_dim; ++i) {
    if (mask & (1UL << i)) idx.push_back(i);
  }
  return IndexSubset(parent_dim, std::move(idx));
}

IndexSubset IndexSubset::full(int parent_dim) {
  std::vector<int> idx(parent_dim);
  for (int i = 0; i < parent_dim; ++i) idx[i] = i;
  return IndexSubset(parent_dim, std::move(idx));
}

bool IndexSubset::contains(int i) const {
  for (int k : indices_) {
    if (k == i) return true;
  }
  return false;
}

unsigned long IndexSubset::mask() const {
  unsigned long m = 0;
  for (int k : indices_) m |= (1UL << k);
  return m;
}

std::vector<int> IndexSubset::one_based() const {
  std::vector<int> out(indices_);
  for (int& k : out) ++k;
  return out;
}

std::string IndexSubset::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k) os << ',';
    os << indices_[k] + 1;
  }
  os << '}';
  return os.str();
}

void require_square_finite(const Matrix& m, const std::string& name) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InputError(name + " must be a nonempty square matrix (got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")");
  }
  if (!m.allFinite()) throw InputError(name + " has non-finite entries");
}

void require_finite(const Vector& v, const std::string& name) {
  if (!v.allFinite()) throw InputError(name + " has non-finite entries");
}

Vector restrict(const Vector& x, const IndexSubset& subset) {
  Vector out(subset.size());
  for (int k = 0; k < subset.size(); ++k) out(k) = x(subset.indices()[k]);
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace rbmcert
