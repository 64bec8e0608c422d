#include "aht/tensor.hpp"

#include <cmath>
#include <string>

namespace aht {

namespace {

std::size_t ipow(int base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

PointTensor::PointTensor(int dim, std::vector<Variance> slots)
    : dim_(dim), slots_(std::move(slots)), data_(ipow(dim, static_cast<int>(slots_.size())), 0.0) {
  if (dim < 1) throw std::invalid_argument("tensor dimension must be positive");
}

PointTensor PointTensor::vector(const Vec& v) {
  PointTensor t(static_cast<int>(v.size()), {Variance::Up});
  for (int i = 0; i < v.size(); ++i) t.data_[static_cast<std::size_t>(i)] = v(i);
  return t;
}

PointTensor PointTensor::covector(const Vec& v) {
  PointTensor t(static_cast<int>(v.size()), {Variance::Down});
  for (int i = 0; i < v.size(); ++i) t.data_[static_cast<std::size_t>(i)] = v(i);
  return t;
}

PointTensor PointTensor::endomorphism(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  PointTensor t(n, {Variance::Up, Variance::Down});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.data_[static_cast<std::size_t>(i * n + j)] = a(i, j);
  return t;
}

PointTensor PointTensor::bilinear(const Mat& b) {
  const int n = static_cast<int>(b.rows());
  PointTensor t(n, {Variance::Down, Variance::Down});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.data_[static_cast<std::size_t>(i * n + j)] = b(i, j);
  return t;
}

int PointTensor::contravariant() const {
  int r = 0;
  for (auto s : slots_) r += s == Variance::Up;
  return r;
}

int PointTensor::covariant() const { return rank() - contravariant(); }

std::size_t PointTensor::stride(int slot) const { return ipow(dim_, rank() - 1 - slot); }

std::size_t PointTensor::offset(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("index count does not match rank");
  std::size_t off = 0;
  for (int k : idx) {
    if (k < 0 || k >= dim_) throw std::out_of_range("tensor index out of range");
    off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(k);
  }
  return off;
}

double& PointTensor::at(std::initializer_list<int> idx) {
  return data_[offset(std::span<const int>(idx.begin(), idx.size()))];
}

double PointTensor::at(std::initializer_list<int> idx) const {
  return data_[offset(std::span<const int>(idx.begin(), idx.size()))];
}

Vec PointTensor::as_vector() const {
  if (rank() != 1) throw std::invalid_argument("as_vector needs a rank-1 tensor");
  return Eigen::Map<const Vec>(data_.data(), dim_);
}

Mat PointTensor::as_matrix() const {
  if (rank() != 2) throw std::invalid_argument("as_matrix needs a rank-2 tensor");
  Mat m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = data_[static_cast<std::size_t>(i * dim_ + j)];
  return m;
}

void PointTensor::require_same_shape(const PointTensor& o) const {
  if (dim_ != o.dim_ || slots_ != o.slots_) throw std::invalid_argument("tensor valence mismatch");
}

PointTensor& PointTensor::operator+=(const PointTensor& o) {
  require_same_shape(o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

PointTensor& PointTensor::operator-=(const PointTensor& o) {
  require_same_shape(o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

PointTensor& PointTensor::operator*=(double c) {
  for (double& x : data_) x *= c;
  return *this;
}

double PointTensor::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double PointTensor::norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

PointTensor operator+(PointTensor a, const PointTensor& b) { return a += b; }
PointTensor operator-(PointTensor a, const PointTensor& b) { return a -= b; }
PointTensor operator*(double c, PointTensor a) { return a *= c; }

PointTensor transform_slot(const PointTensor& t, int slot, const Mat& m, Variance result) {
  if (slot < 0 || slot >= t.rank()) throw std::out_of_range("slot out of range");
  const int n = t.dim();
  if (m.rows() != n || m.cols() != n) throw std::invalid_argument("transform matrix has wrong size");
  auto slots = t.slots();
  slots[static_cast<std::size_t>(slot)] = result;
  PointTensor out(n, slots);
  const std::size_t inner = t.stride(slot);
  const std::size_t block = inner * static_cast<std::size_t>(n);
  const std::size_t outer = t.size() / block;
  for (std::size_t o = 0; o < outer; ++o) {
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < n; ++i) {
        const double w = m(a, i);
        if (w == 0.0) continue;
        const std::size_t src = o * block + static_cast<std::size_t>(i) * inner;
        const std::size_t dst = o * block + static_cast<std::size_t>(a) * inner;
        for (std::size_t q = 0; q < inner; ++q) out[dst + q] += w * t[src + q];
      }
    }
  }
  return out;
}

PointTensor contract(const PointTensor& t, int slot_a, int slot_b) {
  if (slot_a == slot_b || slot_a < 0 || slot_b < 0 || slot_a >= t.rank() || slot_b >= t.rank())
    throw std::out_of_range("invalid contraction slots");
  if (t.slots()[static_cast<std::size_t>(slot_a)] == t.slots()[static_cast<std::size_t>(slot_b)])
    throw std::invalid_argument("contraction requires one up and one down slot");
  std::vector<Variance> slots;
  for (int s = 0; s < t.rank(); ++s)
    if (s != slot_a && s != slot_b) slots.push_back(t.slots()[static_cast<std::size_t>(s)]);
  const int n = t.dim();
  if (slots.empty()) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += t.at({i, i});
    PointTensor out(n, {});
    out[0] = s;
    return out;
  }
  PointTensor out(n, slots);
  std::vector<int> idx(static_cast<std::size_t>(t.rank()));
  std::vector<int> oidx(slots.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t rem = k;
    for (int s = static_cast<int>(slots.size()) - 1; s >= 0; --s) {
      oidx[static_cast<std::size_t>(s)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    int q = 0;
    for (int s = 0; s < t.rank(); ++s)
      if (s != slot_a && s != slot_b) idx[static_cast<std::size_t>(s)] = oidx[static_cast<std::size_t>(q++)];
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      idx[static_cast<std::size_t>(slot_a)] = i;
      idx[static_cast<std::size_t>(slot_b)] = i;
      sum += t[t.offset(idx)];
    }
    out[k] = sum;
  }
  return out;
}

FramePack::FramePack(std::vector<double> point, const Mat& metric) : point_(std::move(point)), metric_(metric) {
  if (metric.rows() != metric.cols()) throw std::invalid_argument("metric must be square");
  const Mat sym = 0.5 * (metric + metric.transpose());
  if ((sym - metric).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + metric.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("metric is not symmetric");
  Eigen::LLT<Mat> llt(sym);
  if (llt.info() != Eigen::Success) throw std::domain_error("metric is not positive definite");
  const Mat lower = llt.matrixL();
  const Mat id = Mat::Identity(metric.rows(), metric.cols());
  frame_ = lower.transpose().triangularView<Eigen::Upper>().solve(id);
  coframe_ = lower.transpose();
}

FramePack FramePack::rotated(const Mat& q) const {
  FramePack out = *this;
  out.frame_ = frame_ * q;
  out.coframe_ = q.transpose() * coframe_;
  return out;
}

PointTensor FramePack::to_frame(const PointTensor& t) const {
  PointTensor out = t;
  const Mat down = frame_.transpose();
  for (int s = 0; s < t.rank(); ++s) {
    const Variance v = t.slots()[static_cast<std::size_t>(s)];
    out = transform_slot(out, s, v == Variance::Down ? down : coframe_, v);
  }
  return out;
}

PointTensor FramePack::from_frame(const PointTensor& t, const std::vector<Variance>& slots) const {
  if (static_cast<int>(slots.size()) != t.rank()) throw std::invalid_argument("slot list does not match rank");
  PointTensor out = t;
  const Mat down = coframe_.transpose();
  for (int s = 0; s < t.rank(); ++s) {
    const Variance v = slots[static_cast<std::size_t>(s)];
    out = transform_slot(out, s, v == Variance::Down ? down : frame_, v);
  }
  return out;
}

double FramePack::orthonormality_defect() const {
  const Mat gram = frame_.transpose() * metric_ * frame_;
  return (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

PointTensor musical(const PointTensor& t, int slot, Musical dir, const Mat& metric) {
  if (slot < 0 || slot >= t.rank()) throw std::out_of_range("slot out of range");
  const Variance v = t.slots()[static_cast<std::size_t>(slot)];
  if (dir == Musical::Flat) {
    if (v != Variance::Up) throw std::invalid_argument("flat needs a contravariant slot");
    return transform_slot(t, slot, metric, Variance::Down);
  }
  if (v != Variance::Down) throw std::invalid_argument("sharp needs a covariant slot");
  Eigen::LLT<Mat> llt(metric);
  if (llt.info() != Eigen::Success) throw std::domain_error("singular or indefinite metric");
  const Mat inv = llt.solve(Mat::Identity(metric.rows(), metric.cols()));
  return transform_slot(t, slot, inv, Variance::Up);
}

double inner_product(const PointTensor& a, const PointTensor& b, const FramePack& frame) {
  if (a.dim() != b.dim() || a.slots() != b.slots()) throw std::invalid_argument("inner product valence mismatch");
  const PointTensor fa = frame.to_frame(a);
  const PointTensor fb = frame.to_frame(b);
  double s = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) s += fa[k] * fb[k];
  return s;
}

Mat wedge2(const Vec& alpha, const Vec& beta) { return alpha * beta.transpose() - beta * alpha.transpose(); }

PointTensor wedge2(const PointTensor& alpha, const PointTensor& beta) {
  if (alpha.rank() != 1 || beta.rank() != 1 || alpha.slots()[0] != Variance::Down ||
      beta.slots()[0] != Variance::Down)
    throw std::invalid_argument("wedge2 needs two covectors");
  if (alpha.dim() != beta.dim()) throw std::invalid_argument("wedge2 dimension mismatch");
  return PointTensor::bilinear(wedge2(alpha.as_vector(), beta.as_vector()));
}

PointTensor endo_form_convert(const PointTensor& t, const Mat& metric, double skew_tol) {
  if (t.rank() != 2) throw std::invalid_argument("endo_form_convert needs a rank-2 tensor");
  const Mat m = t.as_matrix();
  if (t.slots()[0] == Variance::Up && t.slots()[1] == Variance::Down) {
    const Mat b = m.transpose() * metric;
    if ((b + b.transpose()).cwiseAbs().maxCoeff() > skew_tol * (1.0 + b.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("endomorphism is not skew with respect to the metric");
    return PointTensor::bilinear(b);
  }
  if (t.slots()[0] == Variance::Down && t.slots()[1] == Variance::Down) {
    if ((m + m.transpose()).cwiseAbs().maxCoeff() > skew_tol * (1.0 + m.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("bilinear form is not skew");
    Eigen::LLT<Mat> llt(metric);
    if (llt.info() != Eigen::Success) throw std::domain_error("singular or indefinite metric");
    return PointTensor::endomorphism(llt.solve(m.transpose()));
  }
  throw std::invalid_argument("endo_form_convert needs a (1,1) or (0,2) tensor");
}

}  // namespace aht
