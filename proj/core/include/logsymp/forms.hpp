#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "logsymp/field.hpp"
#include "logsymp/manifold.hpp"

namespace logsymp {

/// Which (co)frame the coefficients refer to. In the b-frame the first
/// element is e_0 = rho * d/dx0 (dual e^0 = dx0 / rho, i.e. dt/t near Z); in
/// the coordinate frame it is d/dx0 itself. Both frames are holonomic in the
/// sense that their elements commute, so all calculus is coordinate-like.
enum class Frame { B, Coordinate };

using Mask = unsigned;

/// "(x0, x1, ...)" with the first dim coordinates.
std::string point_str(const Point& p, int dim);

int mask_degree(Mask m);
std::vector<Mask> masks_of_degree(int dim, int k);
std::vector<int> mask_indices(Mask m);
/// Sign of e^{a} ^ e^{b} relative to e^{a|b}; 0 when they overlap.
int wedge_sign(Mask a, Mask b);
/// Sign of e^i ^ e^{m} relative to e^{m | i}.
int insert_sign(int i, Mask m);

/// Coefficient fields of a degree-k object indexed by increasing index sets.
class Coefficients {
 public:
  Coefficients() = default;
  Coefficients(int dim, int degree, Frame frame);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  Frame frame() const { return frame_; }

  const ScalarField& operator[](Mask m) const { return c_[m]; }
  ScalarField& operator[](Mask m) { return c_[m]; }
  /// Coefficient for an arbitrary ordered index list (antisymmetric).
  ScalarField component(const std::vector<int>& idx) const;

  std::vector<Mask> masks() const { return masks_of_degree(dim_, degree_); }
  bool is_zero() const;

  /// All coefficient jets at a point.
  std::array<Jet, 16> jets(const Point& p) const;
  std::array<double, 16> values(const Point& p) const;

 protected:
  int dim_ = 0;
  int degree_ = 0;
  Frame frame_ = Frame::B;
  std::array<ScalarField, 16> c_{};
};

class BForm : public Coefficients {
 public:
  using Coefficients::Coefficients;
  static BForm zero(int dim, int degree, Frame frame = Frame::B);
  static BForm function(int dim, ScalarField f, Frame frame = Frame::B);
  /// f e^{i1} ^ ... ^ e^{ik} (indices in any order).
  static BForm basis(int dim, const std::vector<int>& idx, ScalarField f = ScalarField::constant(1.0),
                     Frame frame = Frame::B);

  BForm operator-() const;
  friend BForm operator+(const BForm& a, const BForm& b);
  friend BForm operator-(const BForm& a, const BForm& b);
  friend BForm operator*(const ScalarField& f, const BForm& a);
  friend BForm operator*(double s, const BForm& a);
};

class BMultiVector : public Coefficients {
 public:
  using Coefficients::Coefficients;
  static BMultiVector zero(int dim, int degree, Frame frame = Frame::B);
  static BMultiVector function(int dim, ScalarField f, Frame frame = Frame::B);
  static BMultiVector basis(int dim, const std::vector<int>& idx, ScalarField f = ScalarField::constant(1.0),
                            Frame frame = Frame::B);

  BMultiVector operator-() const;
  friend BMultiVector operator+(const BMultiVector& a, const BMultiVector& b);
  friend BMultiVector operator-(const BMultiVector& a, const BMultiVector& b);
  friend BMultiVector operator*(const ScalarField& f, const BMultiVector& a);
  friend BMultiVector operator*(double s, const BMultiVector& a);
};

/// Jet of the frame derivative D_i f (D_0 = rho d/dx0 in the b-frame). The
/// result has a gradient but no Hessian.
Jet frame_derivative(const Jet& f, int i, Frame frame, const Jet& rho);
ScalarField frame_derivative(const ScalarField& f, int i, Frame frame, const BManifoldSpec& spec);

// Frame conversions. Forms: smooth coefficients of dx0-legs are b-coefficients
// divided by rho; multivectors the other way round. The divisions use the
// removable-singularity quotient and assume divisibility.
BForm to_frame(const BForm& a, Frame frame, const BManifoldSpec& spec);
BMultiVector to_frame(const BMultiVector& v, Frame frame, const BManifoldSpec& spec);

BForm exterior_derivative(const BForm& a, const BManifoldSpec& spec);
BForm wedge(const BForm& a, const BForm& b);
/// Contraction of a vector field into a form: (i_v a)(...) = a(v, ...).
BForm interior(const BMultiVector& v, const BForm& a);
/// Lie derivative of a form along a vector field, from the frame formula.
BForm lie_derivative(const BMultiVector& v, const BForm& a, const BManifoldSpec& spec);
/// Lie derivative of a multivector field along a vector field.
BMultiVector lie_derivative(const BMultiVector& v, const BMultiVector& w, const BManifoldSpec& spec);

/// Contraction of a one-form into a multivector from the left:
/// i_k P = sum_i k_i dP/dzeta_i. For bivectors this is pi^sharp(k) = pi(k, .).
BMultiVector interior(const BForm& k, const BMultiVector& P);
BMultiVector sharp(const BMultiVector& pi, const BForm& k);
/// omega^flat(v) = i_v omega.
BForm flat(const BForm& omega, const BMultiVector& v);

/// Schouten bracket in a commuting frame:
/// [P, Q] = sum_i (d^R_i P) (D_i Q) - (-1)^{(p-1)(q-1)} (d^R_i Q) (D_i P).
BMultiVector schouten(const BMultiVector& P, const BMultiVector& Q, const BManifoldSpec& spec);
/// d_pi = [pi, .].
BMultiVector poisson_differential(const BMultiVector& pi, const BMultiVector& w, const BManifoldSpec& spec);

/// Grid sup of the Jacobiator J^{ijk} = sum_l (P^{il} d_l P^{jk} + cyclic) of
/// the coordinate-frame coefficients of w.
double schouten_jacobi_residual(const BMultiVector& w, const BManifoldSpec& spec);
double schouten_jacobi_residual(const BMultiVector& w, const BManifoldSpec& spec, const std::vector<Point>& grid);

/// Pointwise matrix inversion in the frame of the input (2-form <-> bivector),
/// with P = Omega^{-1}, Omega_ij = omega(e_i, e_j), P^{ij} = pi(e^i, e^j).
BMultiVector invert(const BForm& omega, const BManifoldSpec& spec);
BForm invert(const BMultiVector& pi, const BManifoldSpec& spec);

struct NondegeneracyReport {
  bool nondegenerate = true;
  std::string chart;
  Point witness{};
  double min_measure = 0.0;  ///< smallest |det| (or norm) seen
};

/// Degree 1: coefficient vector nowhere zero; degree 2: invertible matrix;
/// degree dim: nonvanishing coefficient. Checked on the principal grid and on
/// every cap chart. Throws UnsupportedDegree otherwise.
NondegeneracyReport nondegenerate_check(const BForm& a, const BManifoldSpec& spec);
NondegeneracyReport nondegenerate_check(const BForm& a, const BManifoldSpec& spec, const std::vector<Point>& grid);

/// Map between principal charts given by jets of the target coordinates.
using ChartMap = std::function<std::array<Jet, kMaxDim>(const Point&)>;

/// Pullback of a b-form along a chart map (b-frame in, b-frame out). The
/// divisions by rho(phi0) are removable for b-maps and for smooth forms.
BForm pullback(const ChartMap& map, const BForm& a, const BManifoldSpec& spec);

/// Grid sup-norm of all coefficients.
double sup_norm(const Coefficients& c, const std::vector<Point>& grid);
double sup_norm(const Coefficients& c, const BManifoldSpec& spec);
/// Grid sup-norm of the difference of two objects of equal shape.
double sup_distance(const Coefficients& a, const Coefficients& b, const std::vector<Point>& grid);

/// Smoothness test: every e^0-leg b-coefficient vanishes on every Z component
/// (|c| < tol on the Z grid).
bool is_smooth_form(const BForm& a, const BManifoldSpec& spec, double tol = 1e-10);
/// Tangency test for a coordinate-frame multivector: every d/dx0-leg
/// coefficient vanishes on Z (|c| <= tol * local scale).
bool is_tangent(const BMultiVector& v, const BManifoldSpec& spec, double tol = 1e-8);

/// Pointwise b-frame matrix of a 2-form or bivector.
using Matrix4 = std::array<std::array<double, kMaxDim>, kMaxDim>;
Matrix4 matrix_at(const Coefficients& c, const Point& p);

}  // namespace logsymp
