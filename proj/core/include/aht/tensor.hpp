#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

namespace aht {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Variance { Up, Down };

/// Dense tensor at a point. Entry order is row-major over slots,
/// so the last slot varies fastest.
class PointTensor {
 public:
  PointTensor() = default;
  PointTensor(int dim, std::vector<Variance> slots);

  static PointTensor vector(const Vec& v);
  static PointTensor covector(const Vec& v);
  /// (1,1) tensor with entry (i, j) = A(i, j): slot 0 up, slot 1 down.
  static PointTensor endomorphism(const Mat& a);
  /// (0,2) tensor with entry (i, j) = B(i, j).
  static PointTensor bilinear(const Mat& b);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Variance>& slots() const { return slots_; }
  int contravariant() const;
  int covariant() const;

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;
  std::size_t offset(std::span<const int> idx) const;
  std::size_t stride(int slot) const;

  /// Views for rank-1 and rank-2 tensors.
  Vec as_vector() const;
  Mat as_matrix() const;

  PointTensor& operator+=(const PointTensor& o);
  PointTensor& operator-=(const PointTensor& o);
  PointTensor& operator*=(double c);
  double max_abs() const;
  double norm() const;  // plain Euclidean norm of the entries

 private:
  void require_same_shape(const PointTensor& o) const;
  int dim_ = 0;
  std::vector<Variance> slots_;
  std::vector<double> data_;
};

PointTensor operator+(PointTensor a, const PointTensor& b);
PointTensor operator-(PointTensor a, const PointTensor& b);
PointTensor operator*(double c, PointTensor a);

/// Contracts `slot` of t with matrix m: out[.., a, ..] = sum_i m(a, i) t[.., i, ..].
/// The slot keeps its position; its variance becomes `result`.
PointTensor transform_slot(const PointTensor& t, int slot, const Mat& m, Variance result);

/// Contracts an up slot against a down slot (they must have opposite variance).
PointTensor contract(const PointTensor& t, int slot_a, int slot_b);

/// Orthonormal frame at a point: columns of `frame` are e_a in the coordinate basis.
class FramePack {
 public:
  FramePack() = default;
  /// Cholesky-based frame: g = L L^T, frame = L^{-T}.
  FramePack(std::vector<double> point, const Mat& metric);

  const std::vector<double>& point() const { return point_; }
  const Mat& metric() const { return metric_; }
  const Mat& frame() const { return frame_; }
  /// Inverse of `frame`: row a is the dual covector e^a.
  const Mat& coframe() const { return coframe_; }
  int dim() const { return static_cast<int>(metric_.rows()); }

  /// Same point and metric, frame replaced by frame * q for orthogonal q.
  FramePack rotated(const Mat& q) const;

  /// Coordinate components -> orthonormal frame components.
  PointTensor to_frame(const PointTensor& t) const;
  /// Orthonormal frame components -> coordinate components with given variance.
  PointTensor from_frame(const PointTensor& t, const std::vector<Variance>& slots) const;

  double orthonormality_defect() const;

 private:
  std::vector<double> point_;
  Mat metric_, frame_, coframe_;
};

enum class Musical { Flat, Sharp };

PointTensor musical(const PointTensor& t, int slot, Musical dir, const Mat& metric);

/// Sum over all orthonormal-frame components of a and b (coordinate inputs).
double inner_product(const PointTensor& a, const PointTensor& b, const FramePack& frame);

/// (alpha ^ beta)(Y, Z) = alpha(Y) beta(Z) - alpha(Z) beta(Y).
PointTensor wedge2(const PointTensor& alpha, const PointTensor& beta);
Mat wedge2(const Vec& alpha, const Vec& beta);

/// Skew endomorphism A <-> 2-form b_A(X, Y) = <AX, Y>; direction chosen by valence.
PointTensor endo_form_convert(const PointTensor& t, const Mat& metric, double skew_tol = 1e-9);

}  // namespace aht
