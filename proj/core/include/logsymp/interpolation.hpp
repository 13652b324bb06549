#pragma once

#include <memory>
#include <vector>

#include "logsymp/forms.hpp"
#include "logsymp/manifold.hpp"

namespace logsymp {

/// Samples of a function on a uniform tensor grid of the principal chart,
/// evaluated by local Lagrange interpolation of degree 5 per axis (periodic
/// axes wrap, open axes shift the stencil inward near the ends).
class TensorTable {
 public:
  /// Nodes are those of axis_samples(spec, axis, grid); values in chart_grid
  /// order (last axis fastest).
  TensorTable(const BManifoldSpec& spec, const GridSpec& grid, std::vector<double> values);
  TensorTable(const BManifoldSpec& spec, const GridSpec& grid, const ScalarField& f);

  int dim() const { return dim_; }
  const std::vector<double>& nodes(int axis) const { return nodes_[axis]; }
  const std::vector<double>& values() const { return values_; }

  Jet jet(const Point& x) const;
  double value(const Point& x) const;

 private:
  int dim_ = 0;
  std::vector<std::vector<double>> nodes_;
  std::vector<AxisSpec> axes_;
  std::vector<double> values_;
  std::vector<std::size_t> stride_;
};

/// Degree-5 Lagrange interpolation of samples on the uniform nodes of one axis.
double interpolate_axis(const std::vector<double>& nodes, const AxisSpec& axis, const std::vector<double>& values,
                        double x);

/// Field backed by a table (value, gradient and Hessian of the interpolant).
ScalarField tabulated_field(std::shared_ptr<const TensorTable> table);
ScalarField tabulate(const ScalarField& f, const BManifoldSpec& spec, const GridSpec& grid);
/// Every coefficient tabulated; expression-backed coefficients are kept.
BForm tabulate(const BForm& a, const BManifoldSpec& spec, const GridSpec& grid);

}  // namespace logsymp
