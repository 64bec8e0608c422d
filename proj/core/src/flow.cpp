#include "aht/flow.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace aht {
namespace {

template <int D>
using M = Eigen::Matrix<double, D, D>;
template <int D>
using CMap = Eigen::Map<const M<D>>;
template <int D>
using WMap = Eigen::Map<M<D>>;

template <class F>
decltype(auto) dispatch(int dim, F&& f) {
  switch (dim) {
    case 2: return f.template operator()<2>();
    case 4: return f.template operator()<4>();
    case 6: return f.template operator()<6>();
    case 8: return f.template operator()<8>();
    default: throw std::invalid_argument("grid kernels support dimension 2, 4, 6 or 8");
  }
}

void require_stencil(const JGrid& g) {
  if (g.resolution() < 4) throw std::invalid_argument("finite differences need at least 4 nodes per axis");
}

// Node-index shifts for offsets -4..4 along one axis, per digit of that axis.
class ShiftTable {
 public:
  explicit ShiftTable(const JGrid& g) : m_(g.resolution()), dim_(g.dim()), strides_(dim_) {
    shifts_.resize(static_cast<std::size_t>(dim_ * m_ * 9));
    for (int a = 0; a < dim_; ++a) {
      strides_[a] = g.stride(a);
      for (long d = 0; d < m_; ++d)
        for (int o = -4; o <= 4; ++o) {
          const long moved = ((d + o) % m_ + m_) % m_;
          shifts_[(a * m_ + d) * 9 + (o + 4)] = (moved - d) * static_cast<long>(g.stride(a));
        }
    }
  }
  // Shifts for offsets -4..4 at `node` along `axis`.
  const long* at(std::size_t node, int axis) const {
    const long digit = static_cast<long>((node / strides_[axis]) % static_cast<std::size_t>(m_));
    return shifts_.data() + (axis * m_ + digit) * 9 + 4;
  }

 private:
  long m_;
  int dim_;
  std::vector<std::size_t> strides_;
  std::vector<long> shifts_;
};

// 4th-order central difference of a per-node matrix field along one axis.
template <int D>
M<D> axis_diff(const JGrid& g, const ShiftTable& t, const double* base, std::size_t node_stride,
               std::size_t node, int axis) {
  const double inv = 1.0 / (12.0 * g.spacing());
  const long* sh = t.at(node, axis);
  auto at = [&](int off) { return CMap<D>(base + (static_cast<long>(node) + sh[off]) * static_cast<long>(node_stride)); };
  return inv * (8.0 * (at(1) - at(-1)) - (at(2) - at(-2)));
}

// dJ laid out as [node][axis] blocks of D x D.
template <int D>
std::vector<double> derivatives(const JGrid& g) {
  require_stencil(g);
  constexpr std::size_t block = D * D;
  const int dim = g.dim();
  std::vector<double> out(g.nodes() * dim * block);
  const ShiftTable t(g);
  const double* base = g.raw().data();
  for (std::size_t node = 0; node < g.nodes(); ++node)
    for (int a = 0; a < dim; ++a)
      WMap<D>(out.data() + (node * dim + a) * block) = axis_diff<D>(g, t, base, block, node, a);
  return out;
}

// 1/8 h^D sum |D_a J|^2 = 1/2 h^D sum |xi|^2.
template <int D>
double energy_streaming(const JGrid& g) {
  require_stencil(g);
  const ShiftTable t(g);
  double sum = 0.0;
  for (std::size_t node = 0; node < g.nodes(); ++node)
    for (int a = 0; a < g.dim(); ++a) sum += axis_diff<D>(g, t, g.raw().data(), D * D, node, a).squaredNorm();
  return sum * g.cell_volume() / 8.0;
}

template <int D>
M<D> uperp_part(const M<D>& a, const M<D>& J) {
  const M<D> skew = 0.5 * (a - a.transpose());
  return 0.5 * (skew + J * skew * J);
}

// D_a D_a as one 9-point stencil (offsets -4..4), the exact square of the first-difference stencil.
std::array<double, 9> second_weights(double h) {
  const std::array<double, 5> c{1.0, -8.0, 0.0, 8.0, -1.0};  // offsets -2..2, times 1/(12h)
  std::array<double, 9> w{};
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k) w[j + k] += c[j] * c[k] / (144.0 * h * h);
  return w;
}

// G = 1/4 (Lambda J - J Lambda), Lambda = sum_a D_a D_a J; dE(phi) = h^D sum <G, phi>.
template <int D>
void gradient_into(const JGrid& g, NodeField& out) {
  require_stencil(g);
  constexpr std::size_t block = D * D;
  const std::array<double, 9> w = second_weights(g.spacing());
  const ShiftTable t(g);
  const double* base = g.raw().data();
  out.dim = D;
  out.data.resize(g.nodes() * block);
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    M<D> lap = M<D>::Zero();
    for (int a = 0; a < g.dim(); ++a) {
      const long* sh = t.at(node, a);
      for (int o = -4; o <= 4; ++o)
        lap += w[o + 4] * CMap<D>(base + (static_cast<long>(node) + sh[o]) * static_cast<long>(block));
    }
    const M<D> J = CMap<D>(base + node * block);
    WMap<D>(out.data.data() + node * block) = uperp_part<D>(0.25 * (lap * J - J * lap), J);
  }
}

template <int D>
M<D> expm_small(const M<D>& a) {
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const M<D> x = a / std::ldexp(1.0, squarings);
  M<D> term = M<D>::Identity();
  M<D> result = M<D>::Identity();
  for (int k = 1; k <= 24; ++k) {
    term = (term * x) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int q = 0; q < squarings; ++q) result = result * result;
  return result;
}

template <int D>
double node_defect(const M<D>& J) {
  const double square = (J * J + M<D>::Identity()).cwiseAbs().maxCoeff();
  const double ortho = (J.transpose() * J - M<D>::Identity()).cwiseAbs().maxCoeff();
  return std::max(square, ortho);
}

template <int D>
M<D> reproject(M<D> J) {
  for (int it = 0; it < 20 && node_defect<D>(J) > 1e-15; ++it) {
    const M<D> q = 0.5 * J * (3.0 * M<D>::Identity() - J.transpose() * J);
    J = 0.5 * (q - q.transpose());
  }
  return J;
}

// `out` must have the shape of `g`.
template <int D>
void vary_into(const JGrid& g, const NodeField& phi, double eps, JGrid& out) {
  constexpr std::size_t block = D * D;
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    const M<D> e = expm_small<D>(eps * CMap<D>(phi.data.data() + node * block));
    WMap<D>(out.raw().data() + node * block) = e * CMap<D>(g.raw().data() + node * block) * e.transpose();
  }
}

template <int D>
JGrid vary_impl(const JGrid& g, const NodeField& phi, double eps) {
  JGrid out = g;
  vary_into<D>(g, phi, eps, out);
  return out;
}

template <int D>
NodeField pointwise_impl(const JGrid& g) {
  constexpr std::size_t block = D * D;
  const int dim = g.dim();
  const std::vector<double> dj = derivatives<D>(g);
  std::vector<double> xi(dj.size());
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    const M<D> J = CMap<D>(g.raw().data() + node * block);
    for (int a = 0; a < dim; ++a) {
      const std::size_t off = (node * dim + a) * block;
      WMap<D>(xi.data() + off) = -0.5 * J * CMap<D>(dj.data() + off);
    }
  }
  const ShiftTable t(g);
  NodeField out(D, g.nodes());
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    M<D> acc = M<D>::Zero();
    for (int a = 0; a < dim; ++a) acc -= axis_diff<D>(g, t, xi.data() + a * block, dim * block, node, a);
    WMap<D>(out.data.data() + node * block) = acc;
  }
  return out;
}

template <int D>
double hessian_impl(const JGrid& g, const NodeField& phi) {
  constexpr std::size_t block = D * D;
  const int dim = g.dim();
  const std::vector<double> dj = derivatives<D>(g);
  const ShiftTable t(g);
  double sum = 0.0;
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    const M<D> J = CMap<D>(g.raw().data() + node * block);
    const M<D> p = CMap<D>(phi.data.data() + node * block);
    for (int a = 0; a < dim; ++a) {
      const M<D> dphi = axis_diff<D>(g, t, phi.data.data(), block, node, a);
      const M<D> xi = -0.5 * J * CMap<D>(dj.data() + (node * dim + a) * block);
      const M<D> br = xi * p - p * xi;
      sum += dphi.squaredNorm() - 2.0 * br.squaredNorm();
    }
  }
  return sum * g.cell_volume();
}

template <int D>
double max_node_norm(const NodeField& f) {
  double worst = 0.0;
  for (std::size_t node = 0; node < f.nodes(); ++node)
    worst = std::max(worst, CMap<D>(f.data.data() + node * D * D).norm());
  return worst;
}

template <int D>
FlowResult descend_impl(JGrid g, const FlowOptions& opts) {
  using clock = std::chrono::steady_clock;
  FlowResult res;
  double e0 = energy_streaming<D>(g);
  NodeField grad;
  gradient_into<D>(g, grad);
  double gnorm = l2_norm(g, grad);
  res.trace.push_back({0, e0, gnorm, 0.0, 0.0});
  JGrid trial = g;

  double step = opts.initial_step;
  for (int it = 1; it <= opts.max_iter && gnorm >= opts.tol_grad; ++it) {
    const auto start = clock::now();
    for (double& v : grad.data) v = -v;  // descent direction
    double e1 = 0.0;
    bool accepted = false;
    while (step >= opts.min_step) {
      vary_into<D>(g, grad, step, trial);
      e1 = energy_streaming<D>(trial);
      if (e1 <= e0 - opts.sufficient_decrease * step * gnorm * gnorm) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) {
      for (double& v : grad.data) v = -v;
      res.stalled = true;
      res.stall_reason = "step size underflow at iteration " + std::to_string(it);
      break;
    }
    const double drift = trial.structure_defect();
    res.max_drift = std::max(res.max_drift, drift);
    if (drift > 0.0) {
      for (std::size_t node = 0; node < trial.nodes(); ++node) {
        WMap<D> J(trial.raw().data() + node * D * D);
        J = reproject<D>(J);
      }
      e1 = energy_streaming<D>(trial);
    }
    std::swap(g, trial);
    e0 = e1;
    gradient_into<D>(g, grad);
    gnorm = l2_norm(g, grad);
    const double millis = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    res.trace.push_back({it, e0, gnorm, step, millis});
    if (drift > opts.drift_limit) {
      res.stalled = true;
      res.stall_reason = "constraint drift " + std::to_string(drift) + " above limit";
      break;
    }
    if (opts.on_step && !opts.on_step(it, e0, gnorm)) break;
    step *= opts.grow;
  }
  res.converged = gnorm < opts.tol_grad;
  res.terminal_pointwise = max_node_norm<D>(grad);
  res.terminal_pointwise_naive = max_node_norm<D>(pointwise_coderivative(g));
  res.grid = std::move(g);
  return res;
}

}  // namespace

JGrid::JGrid(int n, int m) : n_(n), m_(m) {
  if (n < 1 || 2 * n > 8) throw std::invalid_argument("grid needs 1 <= n <= 4");
  if (m < 1) throw std::invalid_argument("grid resolution must be positive");
  const int dim = 2 * n;
  nodes_ = 1;
  for (int a = 0; a < dim; ++a) {
    strides_.push_back(nodes_);
    nodes_ *= static_cast<std::size_t>(m);
    if (nodes_ > (std::size_t{1} << 28)) throw std::invalid_argument("grid too large");
  }
  data_.assign(nodes_ * dim * dim, 0.0);
}

JGrid JGrid::constant(int n, int m, const Mat& J) {
  JGrid g(n, m);
  for (std::size_t node = 0; node < g.nodes(); ++node) g.set_J(node, J);
  return g;
}

JGrid JGrid::sample(const AlmostHermitianStructure& s, int m) {
  if (s.dim() % 2 != 0) throw std::invalid_argument("odd dimension");
  JGrid g(s.n(), m);
  const Mat id = Mat::Identity(s.dim(), s.dim());
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int probe = 0; probe < 16; ++probe) {
    std::vector<double> x(static_cast<std::size_t>(s.dim()));
    for (double& v : x) v = angle(rng);
    if ((s.metric.values(x) - id).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("grid flow needs a flat metric; " + s.name + " is not flat");
  }
  for (std::size_t node = 0; node < g.nodes(); ++node) g.set_J(node, s.complex_structure.values(g.coordinates(node)));
  return g;
}

double JGrid::spacing() const { return 2.0 * std::numbers::pi / m_; }

double JGrid::cell_volume() const { return std::pow(spacing(), dim()); }

Mat JGrid::J(std::size_t node) const {
  const int d = dim();
  return Eigen::Map<const Mat>(data_.data() + node * d * d, d, d);
}

void JGrid::set_J(std::size_t node, const Mat& J) {
  const int d = dim();
  if (J.rows() != d || J.cols() != d) throw std::invalid_argument("matrix size does not match the grid");
  Eigen::Map<Mat>(data_.data() + node * d * d, d, d) = J;
}

std::vector<double> JGrid::coordinates(std::size_t node) const {
  std::vector<double> x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = spacing() * static_cast<double>((node / strides_[a]) % m_);
  return x;
}

std::size_t JGrid::neighbor(std::size_t node, int axis, int offset) const {
  const std::size_t stride = strides_[axis];
  const long digit = static_cast<long>((node / stride) % m_);
  const long moved = ((digit + offset) % m_ + m_) % m_;
  return node + static_cast<std::size_t>(moved - digit) * stride;
}

double JGrid::structure_defect() const {
  return dispatch(dim(), [&]<int D>() {
    double worst = 0.0;
    for (std::size_t node = 0; node < nodes_; ++node)
      worst = std::max(worst, node_defect<D>(CMap<D>(data_.data() + node * D * D)));
    return worst;
  });
}

Mat NodeField::at(std::size_t node) const {
  return Eigen::Map<const Mat>(data.data() + node * dim * dim, dim, dim);
}

void NodeField::set(std::size_t node, const Mat& a) {
  Eigen::Map<Mat>(data.data() + node * dim * dim, dim, dim) = a;
}

double l2_inner(const JGrid& g, const NodeField& a, const NodeField& b) {
  if (a.data.size() != b.data.size()) throw std::invalid_argument("field sizes differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) sum += a.data[i] * b.data[i];
  return sum * g.cell_volume();
}

double l2_norm(const JGrid& g, const NodeField& a) { return std::sqrt(l2_inner(g, a, a)); }

TorsionTensor grid_torsion(const JGrid& g, std::size_t node) {
  require_stencil(g);
  const int dim = g.dim();
  const std::size_t block = static_cast<std::size_t>(dim * dim);
  const ShiftTable t(g);
  EndoForm dJ = zero_form(dim);
  for (int a = 0; a < dim; ++a) {
    dJ[a] = dispatch(dim, [&]<int D>() -> Mat { return axis_diff<D>(g, t, g.raw().data(), block, node, a); });
  }
  return torsion_from_frame(g.J(node), dJ, g.coordinates(node), 0.0);
}

TorsionTensor stencil_torsion(const std::function<Mat(std::span<const double>)>& J, int n, int m,
                              std::span<const double> point) {
  if (m < 4) throw std::invalid_argument("finite differences need at least 4 nodes per axis");
  const int dim = 2 * n;
  const double h = 2.0 * std::numbers::pi / m;
  EndoForm dJ = zero_form(dim);
  std::vector<double> x(point.begin(), point.end());
  auto shifted = [&](int a, int off) {
    std::vector<double> y = x;
    y[a] += off * h;
    return J(y);
  };
  for (int a = 0; a < dim; ++a)
    dJ[a] = (8.0 * (shifted(a, 1) - shifted(a, -1)) - (shifted(a, 2) - shifted(a, -2))) / (12.0 * h);
  return torsion_from_frame(J(x), dJ, x, 0.0);
}

double energy(const JGrid& g) {
  return dispatch(g.dim(), [&]<int D>() { return energy_streaming<D>(g); });
}

NodeField gradient(const JGrid& g) {
  return dispatch(g.dim(), [&]<int D>() {
    NodeField out;
    gradient_into<D>(g, out);
    return out;
  });
}

NodeField pointwise_coderivative(const JGrid& g) {
  return dispatch(g.dim(), [&]<int D>() { return pointwise_impl<D>(g); });
}

JGrid vary(const JGrid& g, const NodeField& phi, double eps) {
  if (phi.dim != g.dim() || phi.nodes() != g.nodes()) throw std::invalid_argument("field does not match the grid");
  return dispatch(g.dim(), [&]<int D>() { return vary_impl<D>(g, phi, eps); });
}

NodeField random_variation(const JGrid& g, std::uint64_t seed) {
  const int dim = g.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> freq(-1, 1);
  struct Mode {
    std::vector<int> k;
    Mat a, b;
  };
  auto random_skew = [&] {
    Mat s = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        s(i, j) = gauss(rng);
        s(j, i) = -s(i, j);
      }
    return s;
  };
  std::vector<Mode> modes;
  for (int q = 0; q < 3; ++q) {
    Mode mode;
    for (int a = 0; a < dim; ++a) mode.k.push_back(freq(rng));
    mode.a = random_skew();
    mode.b = random_skew();
    modes.push_back(std::move(mode));
  }
  NodeField phi(dim, g.nodes());
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    const std::vector<double> x = g.coordinates(node);
    Mat acc = Mat::Zero(dim, dim);
    for (const Mode& mode : modes) {
      double phase = 0.0;
      for (int a = 0; a < dim; ++a) phase += mode.k[a] * x[a];
      acc += std::cos(phase) * mode.a + std::sin(phase) * mode.b;
    }
    const Mat J = g.J(node);
    phi.set(node, 0.5 * (acc + J * acc * J));
  }
  const double norm = l2_norm(g, phi);
  if (norm > 0.0)
    for (double& v : phi.data) v /= norm;
  return phi;
}

double first_variation(const JGrid& g, const NodeField& phi) {
  NodeField dstar = gradient(g);
  for (double& v : dstar.data) v = -v;
  return -l2_inner(g, dstar, phi);
}

double directional_difference(const JGrid& g, const NodeField& phi, double eps) {
  return (energy(vary(g, phi, eps)) - energy(vary(g, phi, -eps))) / (2.0 * eps);
}

double second_difference(const JGrid& g, const NodeField& phi, double eps) {
  return (energy(vary(g, phi, eps)) + energy(vary(g, phi, -eps)) - 2.0 * energy(g)) / (eps * eps);
}

HessianValue hessian_form(const JGrid& g, const NodeField& phi, double critical_tol) {
  HessianValue out;
  out.gradient_norm = l2_norm(g, gradient(g));
  out.applicable = out.gradient_norm <= critical_tol;
  if (phi.dim != g.dim() || phi.nodes() != g.nodes()) throw std::invalid_argument("field does not match the grid");
  if (out.applicable) out.value = dispatch(g.dim(), [&]<int D>() { return hessian_impl<D>(g, phi); });
  return out;
}

GradientCheck gradient_check(const JGrid& g, int fields, double eps, std::uint64_t seed) {
  GradientCheck out;
  out.fields = fields;
  std::vector<double> fd, predicted;
  for (int q = 0; q < fields; ++q) {
    const NodeField phi = random_variation(g, seed + static_cast<std::uint64_t>(q));
    fd.push_back(directional_difference(g, phi, eps));
    predicted.push_back(first_variation(g, phi));
  }
  double dot = 0.0;
  for (int q = 0; q < fields; ++q) dot += fd[q] * predicted[q];
  out.sign = dot < 0.0 ? -1.0 : 1.0;
  for (int q = 0; q < fields; ++q) {
    const double denom = std::max(std::abs(fd[q]), std::abs(predicted[q]));
    const double err = denom > 0.0 ? std::abs(fd[q] - out.sign * predicted[q]) / denom : 0.0;
    out.rel_errors.push_back(err);
    out.max_rel_error = std::max(out.max_rel_error, err);
  }
  return out;
}

HessianCheck hessian_check(const JGrid& g, int fields, double critical_tol, std::uint64_t seed) {
  HessianCheck out;
  if (fields < 1) return out;
  std::vector<NodeField> phis;
  for (int q = 0; q < fields; ++q) phis.push_back(random_variation(g, seed + static_cast<std::uint64_t>(q)));
  const HessianValue first = hessian_form(g, phis[0], critical_tol);
  out.applicable = first.applicable;
  if (!out.applicable || first.value == 0.0) return out;
  // eps sweep: keep the eps whose ratio moves least against the next smaller eps.
  const std::array<double, 4> sweep{1e-2, 1e-3, 1e-4, 1e-5};
  std::array<double, 4> ratio{};
  for (std::size_t k = 0; k < sweep.size(); ++k) ratio[k] = second_difference(g, phis[0], sweep[k]) / first.value;
  std::size_t best = 0;
  for (std::size_t k = 1; k + 1 < sweep.size(); ++k)
    if (std::abs(ratio[k] - ratio[k + 1]) < std::abs(ratio[best] - ratio[best + 1])) best = k;
  out.eps = sweep[best];
  out.constant = ratio[best];
  out.min_value = first.value;
  for (int q = 0; q < fields; ++q) {
    const double h = q == 0 ? first.value : hessian_form(g, phis[q], critical_tol).value;
    const double sd = second_difference(g, phis[q], out.eps);
    out.values.push_back(h);
    out.second_differences.push_back(sd);
    out.min_value = std::min(out.min_value, h);
    const double denom = std::abs(out.constant * h);
    out.max_rel_error = std::max(out.max_rel_error, denom > 0.0 ? std::abs(sd - out.constant * h) / denom : 0.0);
  }
  return out;
}

double bracket_closure_defect(const Mat& J, int pairs, std::uint64_t seed) {
  const int dim = static_cast<int>(J.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_uperp = [&] {
    Mat s = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        s(i, j) = gauss(rng);
        s(j, i) = -s(i, j);
      }
    return Mat(0.5 * (s + J * s * J));
  };
  double worst = 0.0;
  for (int q = 0; q < pairs; ++q) {
    const Mat a = random_uperp(), b = random_uperp();
    const Mat c = a * b - b * a;
    worst = std::max(worst, (0.5 * (c + J * c * J)).norm() / (1.0 + c.norm()));
  }
  return worst;
}

FlowResult descend(JGrid g, const FlowOptions& opts) {
  if (opts.initial_step <= 0 || opts.shrink <= 0 || opts.shrink >= 1 || opts.grow < 1)
    throw std::invalid_argument("invalid step policy");
  return dispatch(g.dim(), [&]<int D>() { return descend_impl<D>(std::move(g), opts); });
}

std::string trace_csv(const std::vector<FlowStep>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,energy,grad_norm,step,millis\n";
  for (const FlowStep& s : trace)
    out << s.iteration << ',' << s.energy << ',' << s.grad_norm << ',' << s.step << ',' << s.millis << '\n';
  return out.str();
}

Mat reproject_structure(const Mat& J) {
  return dispatch(static_cast<int>(J.rows()), [&]<int D>() -> Mat { return reproject<D>(M<D>(J)); });
}

}  // namespace aht
