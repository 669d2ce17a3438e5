#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "cffn/errors.hpp"

namespace cffn {

using Index = Eigen::Index;

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;
using VectorD = Vector<double>;

/// Row-major boolean grid, used for partition masks.
class BoolGrid {
 public:
  BoolGrid() = default;
  BoolGrid(Index rows, Index cols, bool value = false)
      : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows * cols), value ? 1 : 0) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  bool operator()(Index r, Index c) const { return cells_[offset(r, c)] != 0; }
  void set(Index r, Index c, bool value) { cells_[offset(r, c)] = value ? 1 : 0; }

  Index count() const {
    Index n = 0;
    for (auto cell : cells_) n += cell;
    return n;
  }

  friend bool operator==(const BoolGrid&, const BoolGrid&) = default;

 private:
  std::size_t offset(Index r, Index c) const { return static_cast<std::size_t>(r * cols_ + c); }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

inline void require_dims(bool ok, const std::string& what) {
  require(ok, ErrorKind::kDimensionMismatch, what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace cffn
