#include "logsymp/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "logsymp/error.hpp"

namespace logsymp {

namespace {

constexpr int kStencil = 6;

struct AxisWeights {
  std::array<int, kStencil> index{};
  std::array<double, kStencil> w0{}, w1{}, w2{};
};

/// Lagrange weights (value, first and second derivative) at x for the nodes
/// s[0..5], via the product rule on each numerator polynomial.
void lagrange_weights(const std::array<double, kStencil>& s, double x, AxisWeights& out, bool derivatives) {
  if (!derivatives) {
    for (int k = 0; k < kStencil; ++k) {
      double p = 1.0, den = 1.0;
      for (int m = 0; m < kStencil; ++m) {
        if (m == k) continue;
        p *= x - s[m];
        den *= s[k] - s[m];
      }
      out.w0[k] = p / den;
    }
    return;
  }
  for (int k = 0; k < kStencil; ++k) {
    double p = 1.0, dp = 0.0, ddp = 0.0, den = 1.0;
    for (int m = 0; m < kStencil; ++m) {
      if (m == k) continue;
      const double f = x - s[m];
      ddp = ddp * f + 2.0 * dp;
      dp = dp * f + p;
      p *= f;
      den *= s[k] - s[m];
    }
    out.w0[k] = p / den;
    out.w1[k] = dp / den;
    out.w2[k] = ddp / den;
  }
}

AxisWeights axis_weights(const std::vector<double>& nodes, const AxisSpec& axis, double x, bool derivatives = true) {
  const int n = static_cast<int>(nodes.size());
  const double h = nodes[1] - nodes[0];
  AxisWeights aw;
  std::array<double, kStencil> s{};
  if (axis.periodic) {
    const int base = static_cast<int>(std::floor((x - nodes[0]) / h)) - (kStencil / 2 - 1);
    for (int k = 0; k < kStencil; ++k) {
      const int j = base + k;
      aw.index[k] = ((j % n) + n) % n;
      s[k] = nodes[0] + j * h;
    }
  } else {
    int base = static_cast<int>(std::floor((x - nodes[0]) / h)) - (kStencil / 2 - 1);
    base = std::clamp(base, 0, n - kStencil);
    for (int k = 0; k < kStencil; ++k) {
      aw.index[k] = base + k;
      s[k] = nodes[base + k];
    }
  }
  lagrange_weights(s, x, aw, derivatives);
  return aw;
}

}  // namespace

TensorTable::TensorTable(const BManifoldSpec& spec, const GridSpec& grid, std::vector<double> values)
    : dim_(spec.dim), values_(std::move(values)) {
  std::size_t total = 1;
  for (int k = 0; k < dim_; ++k) {
    nodes_.push_back(axis_samples(spec, k, grid));
    axes_.push_back(spec.principal.axes[k]);
    if (nodes_.back().size() < static_cast<std::size_t>(kStencil))
      throw Error(ErrorKind::InvalidStructure, "tabulation needs at least 6 nodes per axis");
    total *= nodes_.back().size();
  }
  if (values_.size() != total) throw Error(ErrorKind::InvalidStructure, "table size does not match its grid");
  stride_.assign(dim_, 1);
  for (int k = dim_ - 2; k >= 0; --k) stride_[k] = stride_[k + 1] * nodes_[k + 1].size();
}

TensorTable::TensorTable(const BManifoldSpec& spec, const GridSpec& grid, const ScalarField& f)
    : TensorTable(spec, grid, [&] {
        std::vector<double> v;
        for (const Point& p : chart_grid(spec, grid)) v.push_back(f.value(p));
        return v;
      }()) {}

Jet TensorTable::jet(const Point& x) const {
  std::array<AxisWeights, kMaxDim> aw;
  for (int k = 0; k < dim_; ++k) aw[k] = axis_weights(nodes_[k], axes_[k], x[k]);
  Jet out;
  std::array<int, kMaxDim> it{};
  const int count = static_cast<int>(std::pow(kStencil, dim_));
  for (int c = 0; c < count; ++c) {
    int r = c;
    std::size_t offset = 0;
    for (int k = dim_ - 1; k >= 0; --k) {
      it[k] = r % kStencil;
      r /= kStencil;
      offset += stride_[k] * aw[k].index[it[k]];
    }
    const double f = values_[offset];
    // product weights: value, gradient and Hessian of the tensor basis function
    std::array<double, kMaxDim> w0{}, w1{}, w2{};
    double prod = 1.0;
    for (int k = 0; k < dim_; ++k) {
      w0[k] = aw[k].w0[it[k]];
      w1[k] = aw[k].w1[it[k]];
      w2[k] = aw[k].w2[it[k]];
      prod *= w0[k];
    }
    out.v += prod * f;
    for (int i = 0; i < dim_; ++i) {
      double gi = w1[i];
      for (int k = 0; k < dim_; ++k)
        if (k != i) gi *= w0[k];
      out.g[i] += gi * f;
      for (int j = i; j < dim_; ++j) {
        double hij = 1.0;
        for (int k = 0; k < dim_; ++k) {
          if (i == j && k == i)
            hij *= w2[k];
          else if (k == i || k == j)
            hij *= w1[k];
          else
            hij *= w0[k];
        }
        out.h[i][j] += hij * f;
      }
    }
  }
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < i; ++j) out.h[i][j] = out.h[j][i];
  return out;
}

double TensorTable::value(const Point& x) const {
  std::array<AxisWeights, kMaxDim> aw;
  for (int k = 0; k < dim_; ++k) aw[k] = axis_weights(nodes_[k], axes_[k], x[k], false);
  double out = 0.0;
  const int count = static_cast<int>(std::pow(kStencil, dim_));
  for (int c = 0; c < count; ++c) {
    int r = c;
    std::size_t offset = 0;
    double w = 1.0;
    for (int k = dim_ - 1; k >= 0; --k) {
      const int i = r % kStencil;
      r /= kStencil;
      offset += stride_[k] * aw[k].index[i];
      w *= aw[k].w0[i];
    }
    out += w * values_[offset];
  }
  return out;
}

double interpolate_axis(const std::vector<double>& nodes, const AxisSpec& axis, const std::vector<double>& values,
                        double x) {
  if (nodes.size() < static_cast<std::size_t>(kStencil) || values.size() != nodes.size())
    throw Error(ErrorKind::InvalidStructure, "interpolation needs at least 6 matching samples");
  const AxisWeights aw = axis_weights(nodes, axis, x, false);
  double out = 0.0;
  for (int k = 0; k < kStencil; ++k) out += aw.w0[k] * values[aw.index[k]];
  return out;
}

ScalarField tabulated_field(std::shared_ptr<const TensorTable> table) {
  return ScalarField::from_function([table](const Point& x) { return table->jet(x); },
                                    [table](const Point& x) { return table->value(x); });
}

ScalarField tabulate(const ScalarField& f, const BManifoldSpec& spec, const GridSpec& grid) {
  if (f.is_zero() || f.expr()) return f;
  return tabulated_field(std::make_shared<const TensorTable>(spec, grid, f));
}

BForm tabulate(const BForm& a, const BManifoldSpec& spec, const GridSpec& grid) {
  BForm out(a.dim(), a.degree(), a.frame());
  for (Mask m : a.masks()) out[m] = tabulate(a[m], spec, grid);
  return out;
}

}  // namespace logsymp
