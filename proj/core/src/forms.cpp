#include "logsymp/forms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "logsymp/error.hpp"

namespace logsymp {

std::string point_str(const Point& p, int dim) {
  std::ostringstream os;
  os << "(";
  for (int k = 0; k < dim; ++k) os << (k ? ", " : "") << p[k];
  os << ")";
  return os.str();
}

int mask_degree(Mask m) { return std::popcount(m); }

std::vector<Mask> masks_of_degree(int dim, int k) {
  std::vector<Mask> out;
  for (Mask m = 0; m < (1u << dim); ++m)
    if (mask_degree(m) == k) out.push_back(m);
  return out;
}

std::vector<int> mask_indices(Mask m) {
  std::vector<int> idx;
  for (int i = 0; i < kMaxDim; ++i)
    if (m & (1u << i)) idx.push_back(i);
  return idx;
}

int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int swaps = 0;
  for (int i : mask_indices(a)) swaps += std::popcount(b & ((1u << i) - 1u));
  return swaps % 2 ? -1 : 1;
}

int insert_sign(int i, Mask m) {
  if (m & (1u << i)) return 0;
  return std::popcount(m & ((1u << i) - 1u)) % 2 ? -1 : 1;
}

namespace {

/// Sorts an index list in place; returns the permutation sign (0 on repeats).
int sort_sign(std::vector<int>& idx, Mask& mask) {
  int sign = 1;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      if (idx[a] == idx[b]) return 0;
      if (idx[a] > idx[b]) {
        std::swap(idx[a], idx[b]);
        sign = -sign;
      }
    }
  mask = 0;
  for (int i : idx) mask |= 1u << i;
  return sign;
}

using ComponentsFn = std::function<std::array<Jet, 16>(const Point&)>;

/// Wraps a pointwise evaluator of all components into per-component fields
/// that share one evaluation per point.
template <class T>
T from_components(int dim, int degree, Frame frame, ComponentsFn fn) {
  static std::atomic<unsigned long> next_id{1};
  struct Shared {
    unsigned long id;
    ComponentsFn fn;
  };
  auto shared = std::make_shared<Shared>(Shared{next_id++, std::move(fn)});
  T out(dim, degree, frame);
  for (Mask m : masks_of_degree(dim, degree)) {
    out[m] = ScalarField::from_function([shared, m](const Point& p) {
      struct Cache {
        unsigned long id = 0;
        Point p{};
        std::array<Jet, 16> value;
      };
      thread_local Cache cache;
      if (cache.id != shared->id || cache.p != p) {
        cache.value = shared->fn(p);
        cache.id = shared->id;
        cache.p = p;
      }
      return cache.value[m];
    });
  }
  return out;
}

void require_same_shape(const Coefficients& a, const Coefficients& b, const char* what) {
  if (a.dim() != b.dim() || a.degree() != b.degree() || a.frame() != b.frame())
    throw Error(ErrorKind::InvalidStructure, std::string("shape mismatch in ") + what);
}

void require_same_frame(const Coefficients& a, const Coefficients& b, const char* what) {
  if (a.dim() != b.dim() || a.frame() != b.frame())
    throw Error(ErrorKind::InvalidStructure, std::string("frame mismatch in ") + what);
}

Jet jet_det(const std::vector<std::vector<Jet>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return Jet(1.0);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  Jet det;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<Jet>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Jet> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(std::move(row));
    }
    const Jet term = m[0][c] * jet_det(minor);
    det = c % 2 ? det - term : det + term;
  }
  return det;
}

}  // namespace

// ---------------------------------------------------------------------------

Coefficients::Coefficients(int dim, int degree, Frame frame) : dim_(dim), degree_(degree), frame_(frame) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::InvalidStructure, "unsupported dimension");
  // degrees above dim are allowed and denote the zero object
  if (degree < 0 || degree > dim + 1) throw Error(ErrorKind::UnsupportedDegree, "degree out of range");
}

ScalarField Coefficients::component(const std::vector<int>& idx) const {
  std::vector<int> sorted = idx;
  Mask m = 0;
  const int s = sort_sign(sorted, m);
  if (s == 0) return ScalarField();
  return s > 0 ? c_[m] : -c_[m];
}

bool Coefficients::is_zero() const {
  for (Mask m : masks())
    if (!c_[m].is_zero()) return false;
  return true;
}

std::array<Jet, 16> Coefficients::jets(const Point& p) const {
  std::array<Jet, 16> out;
  for (Mask m : masks())
    if (!c_[m].is_zero()) out[m] = c_[m].jet(p);
  return out;
}

std::array<double, 16> Coefficients::values(const Point& p) const {
  std::array<double, 16> out{};
  for (Mask m : masks())
    if (!c_[m].is_zero()) out[m] = c_[m].value(p);
  return out;
}

// ---------------------------------------------------------------------------

BForm BForm::zero(int dim, int degree, Frame frame) { return BForm(dim, degree, frame); }

BForm BForm::function(int dim, ScalarField f, Frame frame) {
  BForm a(dim, 0, frame);
  a[0] = std::move(f);
  return a;
}

BForm BForm::basis(int dim, const std::vector<int>& idx, ScalarField f, Frame frame) {
  BForm a(dim, static_cast<int>(idx.size()), frame);
  std::vector<int> sorted = idx;
  Mask m = 0;
  const int s = sort_sign(sorted, m);
  if (s != 0) a[m] = s > 0 ? f : -f;
  return a;
}

BForm BForm::operator-() const {
  BForm r = *this;
  for (Mask m : masks()) r[m] = -c_[m];
  return r;
}

BForm operator+(const BForm& a, const BForm& b) {
  require_same_shape(a, b, "form sum");
  BForm r = a;
  for (Mask m : a.masks()) r[m] = a[m] + b[m];
  return r;
}

BForm operator-(const BForm& a, const BForm& b) { return a + (-b); }

BForm operator*(const ScalarField& f, const BForm& a) {
  BForm r = a;
  for (Mask m : a.masks()) r[m] = f * a[m];
  return r;
}

BForm operator*(double s, const BForm& a) { return ScalarField::constant(s) * a; }

BMultiVector BMultiVector::zero(int dim, int degree, Frame frame) { return BMultiVector(dim, degree, frame); }

BMultiVector BMultiVector::function(int dim, ScalarField f, Frame frame) {
  BMultiVector a(dim, 0, frame);
  a[0] = std::move(f);
  return a;
}

BMultiVector BMultiVector::basis(int dim, const std::vector<int>& idx, ScalarField f, Frame frame) {
  BMultiVector a(dim, static_cast<int>(idx.size()), frame);
  std::vector<int> sorted = idx;
  Mask m = 0;
  const int s = sort_sign(sorted, m);
  if (s != 0) a[m] = s > 0 ? f : -f;
  return a;
}

BMultiVector BMultiVector::operator-() const {
  BMultiVector r = *this;
  for (Mask m : masks()) r[m] = -c_[m];
  return r;
}

BMultiVector operator+(const BMultiVector& a, const BMultiVector& b) {
  require_same_shape(a, b, "multivector sum");
  BMultiVector r = a;
  for (Mask m : a.masks()) r[m] = a[m] + b[m];
  return r;
}

BMultiVector operator-(const BMultiVector& a, const BMultiVector& b) { return a + (-b); }

BMultiVector operator*(const ScalarField& f, const BMultiVector& a) {
  BMultiVector r = a;
  for (Mask m : a.masks()) r[m] = f * a[m];
  return r;
}

BMultiVector operator*(double s, const BMultiVector& a) { return ScalarField::constant(s) * a; }

// ---------------------------------------------------------------------------

Jet frame_derivative(const Jet& f, int i, Frame frame, const Jet& rho) {
  Jet r(f.g[i]);
  for (int k = 0; k < kMaxDim; ++k) r.g[k] = f.h[i][k];
  if (frame == Frame::B && i == 0) {
    const double d = r.v;
    r.v = rho.v * d;
    for (int k = 0; k < kMaxDim; ++k) r.g[k] = rho.g[k] * d + rho.v * r.g[k];
  }
  r.drop_hessian();
  return r;
}

ScalarField frame_derivative(const ScalarField& f, int i, Frame frame, const BManifoldSpec& spec) {
  if (f.is_zero()) return f;
  ScalarField rho = spec.defining;
  return ScalarField::from_function([f, i, frame, rho](const Point& p) {
    return frame_derivative(f.jet(p), i, frame, frame == Frame::B && i == 0 ? rho.jet(p) : Jet(1.0));
  });
}

namespace {

ScalarField times_rho(const ScalarField& c, const BManifoldSpec& spec) { return c.is_zero() ? c : spec.defining * c; }

ScalarField over_rho(const ScalarField& c, const BManifoldSpec& spec) {
  if (c.is_zero()) return c;
  ScalarField rho = spec.defining;
  return ScalarField::from_function([c, rho](const Point& p) { return divide_removable(c.jet(p), rho.jet(p), 0); });
}

}  // namespace

BForm to_frame(const BForm& a, Frame frame, const BManifoldSpec& spec) {
  if (a.frame() == frame) return a;
  BForm r(a.dim(), a.degree(), frame);
  for (Mask m : a.masks()) {
    if (!(m & 1u)) r[m] = a[m];
    else r[m] = frame == Frame::Coordinate ? over_rho(a[m], spec) : times_rho(a[m], spec);
  }
  return r;
}

BMultiVector to_frame(const BMultiVector& v, Frame frame, const BManifoldSpec& spec) {
  if (v.frame() == frame) return v;
  BMultiVector r(v.dim(), v.degree(), frame);
  for (Mask m : v.masks()) {
    if (!(m & 1u)) r[m] = v[m];
    else r[m] = frame == Frame::Coordinate ? times_rho(v[m], spec) : over_rho(v[m], spec);
  }
  return r;
}

BForm exterior_derivative(const BForm& a, const BManifoldSpec& spec) {
  BForm r(a.dim(), a.degree() + 1, a.frame());
  for (Mask J : r.masks()) {
    ScalarField sum;
    for (int i : mask_indices(J)) {
      const Mask rest = J & ~(1u << i);
      if (a[rest].is_zero()) continue;
      const ScalarField d = frame_derivative(a[rest], i, a.frame(), spec);
      sum += insert_sign(i, rest) > 0 ? d : -d;
    }
    r[J] = sum;
  }
  return r;
}

BForm wedge(const BForm& a, const BForm& b) {
  require_same_frame(a, b, "wedge");
  if (a.degree() + b.degree() > a.dim()) return BForm(a.dim(), a.dim() + 1, a.frame());
  BForm r(a.dim(), a.degree() + b.degree(), a.frame());
  for (Mask A : a.masks()) {
    if (a[A].is_zero()) continue;
    for (Mask B : b.masks()) {
      const int s = wedge_sign(A, B);
      if (s == 0 || b[B].is_zero()) continue;
      const ScalarField prod = a[A] * b[B];
      r[A | B] += s > 0 ? prod : -prod;
    }
  }
  return r;
}

BForm interior(const BMultiVector& v, const BForm& a) {
  require_same_frame(v, a, "interior");
  if (v.degree() != 1) throw Error(ErrorKind::UnsupportedDegree, "interior product needs a vector field");
  if (a.degree() == 0) return BForm(a.dim(), 0, a.frame());
  BForm r(a.dim(), a.degree() - 1, a.frame());
  for (Mask J : r.masks()) {
    ScalarField sum;
    for (int i = 0; i < a.dim(); ++i) {
      const int s = insert_sign(i, J);
      const Mask vi = 1u << i;
      if (s == 0 || v[vi].is_zero() || a[J | vi].is_zero()) continue;
      const ScalarField prod = v[vi] * a[J | vi];
      sum += s > 0 ? prod : -prod;
    }
    r[J] = sum;
  }
  return r;
}

BForm lie_derivative(const BMultiVector& v, const BForm& a, const BManifoldSpec& spec) {
  require_same_frame(v, a, "Lie derivative");
  const int n = a.dim();
  BForm r(n, a.degree(), a.frame());
  std::vector<std::vector<ScalarField>> dv(n, std::vector<ScalarField>(n));  // dv[j][i] = D_j v^i
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dv[j][i] = frame_derivative(v[1u << i], j, v.frame(), spec);
  for (Mask I : a.masks()) {
    if (a[I].is_zero()) continue;
    ScalarField transport;
    for (int i = 0; i < n; ++i)
      if (!v[1u << i].is_zero()) transport += v[1u << i] * frame_derivative(a[I], i, a.frame(), spec);
    r[I] += transport;
    const std::vector<int> idx = mask_indices(I);
    for (std::size_t pos = 0; pos < idx.size(); ++pos)
      for (int j = 0; j < n; ++j) {
        if (dv[j][idx[pos]].is_zero()) continue;
        std::vector<int> replaced = idx;
        replaced[pos] = j;
        Mask m = 0;
        const int s = sort_sign(replaced, m);
        if (s == 0) continue;
        const ScalarField term = a[I] * dv[j][idx[pos]];
        r[m] += s > 0 ? term : -term;
      }
  }
  return r;
}

BMultiVector lie_derivative(const BMultiVector& v, const BMultiVector& w, const BManifoldSpec& spec) {
  require_same_frame(v, w, "Lie derivative");
  if (v.degree() != 1) throw Error(ErrorKind::UnsupportedDegree, "Lie derivative along a non-vector");
  const int n = w.dim();
  BMultiVector r(n, w.degree(), w.frame());
  std::vector<std::vector<ScalarField>> dv(n, std::vector<ScalarField>(n));  // dv[i][j] = D_i v^j
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dv[i][j] = frame_derivative(v[1u << j], i, v.frame(), spec);
  for (Mask I : w.masks()) {
    if (w[I].is_zero()) continue;
    ScalarField transport;
    for (int i = 0; i < n; ++i)
      if (!v[1u << i].is_zero()) transport += v[1u << i] * frame_derivative(w[I], i, w.frame(), spec);
    r[I] += transport;
    const std::vector<int> idx = mask_indices(I);
    for (std::size_t pos = 0; pos < idx.size(); ++pos)
      for (int j = 0; j < n; ++j) {
        if (dv[idx[pos]][j].is_zero()) continue;
        std::vector<int> replaced = idx;
        replaced[pos] = j;
        Mask m = 0;
        const int s = sort_sign(replaced, m);
        if (s == 0) continue;
        const ScalarField term = w[I] * dv[idx[pos]][j];
        r[m] += s > 0 ? -term : term;
      }
  }
  return r;
}

BMultiVector interior(const BForm& k, const BMultiVector& P) {
  require_same_frame(k, P, "contraction");
  if (k.degree() != 1) throw Error(ErrorKind::UnsupportedDegree, "contraction needs a one-form");
  if (P.degree() == 0) return BMultiVector(P.dim(), 0, P.frame());
  BMultiVector r(P.dim(), P.degree() - 1, P.frame());
  for (Mask I : P.masks()) {
    if (P[I].is_zero()) continue;
    for (int i : mask_indices(I)) {
      if (k[1u << i].is_zero()) continue;
      const int pos = std::popcount(I & ((1u << i) - 1u));
      const ScalarField term = k[1u << i] * P[I];
      r[I & ~(1u << i)] += pos % 2 ? -term : term;
    }
  }
  return r;
}

BMultiVector sharp(const BMultiVector& pi, const BForm& k) { return interior(k, pi); }

BForm flat(const BForm& omega, const BMultiVector& v) { return interior(v, omega); }

BMultiVector schouten(const BMultiVector& P, const BMultiVector& Q, const BManifoldSpec& spec) {
  require_same_frame(P, Q, "Schouten bracket");
  const int n = P.dim(), p = P.degree(), q = Q.degree();
  const int deg = p + q - 1;
  if (deg < 0) return BMultiVector(n, 0, P.frame());
  if (deg > n) return BMultiVector(n, n + 1, P.frame());
  const Frame frame = P.frame();
  const ScalarField rho = spec.defining;
  const double swap_sign = ((p - 1) * (q - 1)) % 2 ? -1.0 : 1.0;
  const auto Pm = P.masks(), Qm = Q.masks();
  return from_components<BMultiVector>(n, deg, frame, [=](const Point& x) {
    std::array<Jet, 16> out;
    const std::array<Jet, 16> PJ = P.jets(x), QJ = Q.jets(x);
    const Jet r = frame == Frame::B ? rho.jet(x) : Jet(1.0);
    // accumulates sign * (right derivative of A along zeta_i) * (D_i B)
    auto half = [&](const std::array<Jet, 16>& AJ, const std::vector<Mask>& Am, int a_deg,
                    const std::array<Jet, 16>& BJ, const std::vector<Mask>& Bm, int i, double sign) {
      for (Mask B : Bm) {
        const Jet dB = frame_derivative(BJ[B], i, frame, r);
        if (dB.v == 0.0 && std::all_of(dB.g.begin(), dB.g.end(), [](double g) { return g == 0.0; })) continue;
        for (Mask A : Am) {
          if (!(A & (1u << i))) continue;
          const int pos = std::popcount(A & ((1u << i) - 1u));
          const double rs = (a_deg - 1 - pos) % 2 ? -1.0 : 1.0;
          const Mask Ar = A & ~(1u << i);
          const int ws = wedge_sign(Ar, B);
          if (ws == 0) continue;
          out[Ar | B] += (sign * rs * ws) * (AJ[A] * dB);
        }
      }
    };
    for (int i = 0; i < n; ++i) {
      half(PJ, Pm, p, QJ, Qm, i, 1.0);
      half(QJ, Qm, q, PJ, Pm, i, -swap_sign);
    }
    return out;
  });
}

BMultiVector poisson_differential(const BMultiVector& pi, const BMultiVector& w, const BManifoldSpec& spec) {
  return schouten(pi, w, spec);
}

double schouten_jacobi_residual(const BMultiVector& w, const BManifoldSpec& spec, const std::vector<Point>& grid) {
  if (w.degree() != 2) throw Error(ErrorKind::UnsupportedDegree, "Jacobi residual needs a bivector");
  const BMultiVector c = to_frame(w, Frame::Coordinate, spec);
  const int n = c.dim();
  if (n < 3) return 0.0;
  double sup = 0.0;
  for (const Point& x : grid) {
    std::array<std::array<Jet, kMaxDim>, kMaxDim> P;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        P[i][j] = c[(1u << i) | (1u << j)].jet(x);
        P[j][i] = -P[i][j];
      }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          double J = 0.0;
          for (int l = 0; l < n; ++l)
            J += P[i][l].v * P[j][k].g[l] + P[j][l].v * P[k][i].g[l] + P[k][l].v * P[i][j].g[l];
          sup = std::max(sup, std::fabs(J));
        }
  }
  return sup;
}

double schouten_jacobi_residual(const BMultiVector& w, const BManifoldSpec& spec) {
  return schouten_jacobi_residual(w, spec, chart_grid(spec));
}

// ---------------------------------------------------------------------------

namespace {

/// Inverse of an antisymmetric jet matrix given by its upper-triangle masks.
std::array<Jet, 16> invert_at(const std::array<Jet, 16>& in, int n, const Point& x) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  std::array<Eigen::Matrix4d, kMaxDim> dA;
  std::array<std::array<Eigen::Matrix4d, kMaxDim>, kMaxDim> ddA;
  for (auto& m : dA) m.setZero();
  for (auto& row : ddA)
    for (auto& m : row) m.setZero();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Jet& c = in[(1u << i) | (1u << j)];
      A(i, j) = c.v;
      A(j, i) = -c.v;
      for (int k = 0; k < kMaxDim; ++k) {
        dA[k](i, j) = c.g[k];
        dA[k](j, i) = -c.g[k];
        for (int l = 0; l < kMaxDim; ++l) {
          ddA[k][l](i, j) = c.h[k][l];
          ddA[k][l](j, i) = -c.h[k][l];
        }
      }
    }
  const Eigen::MatrixXd An = A.topLeftCorner(n, n);
  const double det = An.determinant();
  const double scale = std::pow(std::max(An.cwiseAbs().maxCoeff(), 1e-300), n);
  if (!(std::fabs(det) > 1e-13 * scale))
    throw Error(ErrorKind::Degeneracy, "singular b-frame matrix at " + point_str(x, n));
  Eigen::Matrix4d Ai = Eigen::Matrix4d::Zero();
  Ai.topLeftCorner(n, n) = An.inverse();
  std::array<Eigen::Matrix4d, kMaxDim> dP;
  for (int k = 0; k < kMaxDim; ++k) dP[k] = -Ai * dA[k] * Ai;
  std::array<Jet, 16> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Jet r(Ai(i, j));
      for (int k = 0; k < kMaxDim; ++k) {
        r.g[k] = dP[k](i, j);
        for (int l = 0; l < kMaxDim; ++l) {
          const Eigen::Matrix4d h = -Ai * ddA[k][l] * Ai - dP[k] * dA[l] * Ai - dP[l] * dA[k] * Ai;
          r.h[k][l] = h(i, j);
        }
      }
      out[(1u << i) | (1u << j)] = r;
    }
  return out;
}

}  // namespace

namespace {

// Fails fast with the first singular grid point instead of at first evaluation.
void require_invertible(const Coefficients& c, const BManifoldSpec& spec) {
  const int n = c.dim();
  for (const Point& x : chart_grid(spec, n > 2 ? GridSpec{17, 8} : GridSpec{33, 16})) {
    const Matrix4 m = matrix_at(c, x);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = m[i][j];
    const double scale = std::pow(std::max(A.cwiseAbs().maxCoeff(), 1e-300), n);
    if (!(std::fabs(A.determinant()) > 1e-13 * scale))
      throw Error(ErrorKind::Degeneracy, "singular b-frame matrix at " + point_str(x, n));
  }
}

}  // namespace

BMultiVector invert(const BForm& omega, const BManifoldSpec& spec) {
  if (omega.degree() != 2 || omega.dim() % 2)
    throw Error(ErrorKind::UnsupportedDegree, "inversion needs a two-form in even dimension");
  require_invertible(omega, spec);
  const int n = omega.dim();
  return from_components<BMultiVector>(n, 2, omega.frame(),
                                       [omega, n](const Point& x) { return invert_at(omega.jets(x), n, x); });
}

BForm invert(const BMultiVector& pi, const BManifoldSpec& spec) {
  if (pi.degree() != 2 || pi.dim() % 2)
    throw Error(ErrorKind::UnsupportedDegree, "inversion needs a bivector in even dimension");
  require_invertible(pi, spec);
  const int n = pi.dim();
  return from_components<BForm>(n, 2, pi.frame(), [pi, n](const Point& x) { return invert_at(pi.jets(x), n, x); });
}

Matrix4 matrix_at(const Coefficients& c, const Point& p) {
  Matrix4 m{};
  if (c.degree() != 2) throw Error(ErrorKind::UnsupportedDegree, "matrix of a non-2-tensor");
  const auto v = c.values(p);
  for (int i = 0; i < c.dim(); ++i)
    for (int j = i + 1; j < c.dim(); ++j) {
      m[i][j] = v[(1u << i) | (1u << j)];
      m[j][i] = -m[i][j];
    }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

/// Nondegeneracy measure of coordinate-frame coefficients (already pulled back).
double measure(const std::array<double, 16>& v, int dim, int degree) {
  if (degree == 1) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s = std::max(s, std::fabs(v[1u << i]));
    return s;
  }
  if (degree == dim) return std::fabs(v[(1u << dim) - 1u]);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      A(i, j) = v[(1u << i) | (1u << j)];
      A(j, i) = -A(i, j);
    }
  return std::fabs(A.determinant());
}

/// Signed volume (top degree) or Pfaffian (2-forms in even dimension). A sign
/// change across the connected chart forces a zero between grid points.
std::optional<double> oriented_measure(const std::array<double, 16>& v, int dim, int degree) {
  if (degree == dim) return v[(1u << dim) - 1u];
  if (degree == 2 && dim == 4) return v[0b0011] * v[0b1100] - v[0b0101] * v[0b1010] + v[0b1001] * v[0b0110];
  return std::nullopt;
}

constexpr double kNondegTol = 1e-12;

}  // namespace

NondegeneracyReport nondegenerate_check(const BForm& a, const BManifoldSpec& spec, const std::vector<Point>& grid) {
  const int k = a.degree(), n = a.dim();
  if (k != 1 && k != 2 && k != n)
    throw Error(ErrorKind::UnsupportedDegree,
                "nondegenerate b-forms can exist only in degrees 1, 2 and dim(M); got degree " + std::to_string(k));
  NondegeneracyReport rep;
  rep.chart = spec.principal.name;
  rep.min_measure = std::numeric_limits<double>::infinity();
  bool positive = false, negative = false;
  for (const Point& x : grid) {
    const auto v = a.values(x);
    const double m = measure(v, n, k);
    if (m < rep.min_measure) {
      rep.min_measure = m;
      rep.witness = x;
    }
    if (const auto o = oriented_measure(v, n, k)) (*o > 0 ? positive : negative) = true;
  }
  if (rep.min_measure <= kNondegTol || (positive && negative)) {
    rep.nondegenerate = false;
    return rep;
  }
  // Cap charts: transform to the cap coordinate coframe.
  const BForm smooth = to_frame(a, Frame::Coordinate, spec);
  for (const CapChart& cap : spec.caps) {
    const int nr = 8, na = 16, nt = n > 2 ? 8 : 1;
    for (int ir = 0; ir < nr; ++ir)
      for (int ia = 0; ia < na; ++ia)
        for (int i1 = 0; i1 < nt; ++i1)
          for (int i2 = 0; i2 < nt; ++i2) {
            const double r = 1e-3 + (cap.r_max - 1e-3) * ir / (nr - 1);
            const double ang = 2.0 * std::numbers::pi * ia / na;
            Point q{r * std::cos(ang), r * std::sin(ang), 2.0 * std::numbers::pi * i1 / nt,
                    2.0 * std::numbers::pi * i2 / nt};
            const auto xj = cap.to_principal(q);
            Point x{};
            for (int c = 0; c < n; ++c) x[c] = xj[c].v;
            const auto v = smooth.values(x);
            std::array<double, 16> pulled{};
            for (Mask J : masks_of_degree(n, k)) {
              const auto Jidx = mask_indices(J);
              double s = 0.0;
              for (Mask I : masks_of_degree(n, k)) {
                if (v[I] == 0.0) continue;
                const auto Iidx = mask_indices(I);
                std::vector<std::vector<Jet>> sub(k, std::vector<Jet>(k));
                for (int r1 = 0; r1 < k; ++r1)
                  for (int c1 = 0; c1 < k; ++c1) sub[r1][c1] = Jet(xj[Iidx[r1]].g[Jidx[c1]]);
                s += v[I] * jet_det(sub).v;
              }
              pulled[J] = s;
            }
            const double m = measure(pulled, n, k);
            if (m <= kNondegTol) {
              rep.nondegenerate = false;
              rep.chart = cap.chart.name;
              rep.witness = q;
              rep.min_measure = m;
              return rep;
            }
          }
  }
  return rep;
}

NondegeneracyReport nondegenerate_check(const BForm& a, const BManifoldSpec& spec) {
  return nondegenerate_check(a, spec, chart_grid(spec));
}

// ---------------------------------------------------------------------------

BForm pullback(const ChartMap& map, const BForm& a, const BManifoldSpec& spec) {
  if (a.frame() != Frame::B) throw Error(ErrorKind::InvalidStructure, "pullback expects a b-frame form");
  const int n = a.dim(), k = a.degree();
  const ScalarField rho = spec.defining;
  const AxisSpec axis0 = spec.principal.axes[0];
  return from_components<BForm>(n, k, Frame::B, [=](const Point& x) {
    const auto phi = map(x);
    if (!axis0.periodic && (phi[0].v <= axis0.lo || phi[0].v >= axis0.hi))
      throw Error(ErrorKind::ChartEscape, "pullback point leaves the chart at " + point_str(x, n));
    Point y{};
    for (int c = 0; c < n; ++c) y[c] = phi[c].v;
    const Jet rx = rho.jet(x);
    const Jet ry = compose(rho, phi, n);
    // M[i][j] = D_j phi^i; row 0 still has to be divided by rho(phi0).
    std::vector<std::vector<Jet>> M(n, std::vector<Jet>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M[i][j] = frame_derivative(phi[i], j, Frame::B, rx);
    std::array<Jet, 16> alpha;
    for (Mask I : a.masks())
      if (!a[I].is_zero()) alpha[I] = compose(a[I], phi, n);
    std::array<Jet, 16> out;
    for (Mask J : a.masks()) {
      const auto Jidx = mask_indices(J);
      Jet singular, regular;
      for (Mask I : a.masks()) {
        if (a[I].is_zero()) continue;
        const auto Iidx = mask_indices(I);
        std::vector<std::vector<Jet>> sub(k, std::vector<Jet>(k));
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c) sub[r][c] = M[Iidx[r]][Jidx[c]];
        const Jet term = alpha[I] * jet_det(sub);
        if (I & 1u) singular += term;
        else regular += term;
      }
      out[J] = regular + divide_removable(singular, ry, 0);
    }
    return out;
  });
}

// ---------------------------------------------------------------------------

double sup_norm(const Coefficients& c, const std::vector<Point>& grid) {
  double s = 0.0;
  for (const Point& p : grid) {
    const auto v = c.values(p);
    for (Mask m : c.masks()) s = std::max(s, std::fabs(v[m]));
  }
  return s;
}

double sup_norm(const Coefficients& c, const BManifoldSpec& spec) { return sup_norm(c, chart_grid(spec)); }

double sup_distance(const Coefficients& a, const Coefficients& b, const std::vector<Point>& grid) {
  if (a.dim() != b.dim() || a.degree() != b.degree() || a.frame() != b.frame())
    throw Error(ErrorKind::InvalidStructure, "shape mismatch in distance");
  double s = 0.0;
  for (const Point& p : grid) {
    const auto va = a.values(p), vb = b.values(p);
    for (Mask m : a.masks()) s = std::max(s, std::fabs(va[m] - vb[m]));
  }
  return s;
}

bool is_smooth_form(const BForm& a, const BManifoldSpec& spec, double tol) {
  const BForm b = to_frame(a, Frame::B, spec);
  for (int comp = 0; comp < static_cast<int>(spec.z_components.size()); ++comp)
    for (const Point& p : z_grid(spec, comp))
      for (Mask m : b.masks())
        if ((m & 1u) && !b[m].is_zero() && std::fabs(b[m].value(p)) >= tol) return false;
  return true;
}

bool is_tangent(const BMultiVector& v, const BManifoldSpec& spec, double tol) {
  if (v.frame() == Frame::B) return true;
  for (int comp = 0; comp < static_cast<int>(spec.z_components.size()); ++comp)
    for (const Point& p : z_grid(spec, comp)) {
      const auto vals = v.values(p);
      double scale = 1.0;
      for (Mask m : v.masks()) scale = std::max(scale, std::fabs(vals[m]));
      for (Mask m : v.masks())
        if ((m & 1u) && std::fabs(vals[m]) > tol * scale) return false;
    }
  return true;
}

}  // namespace logsymp
