#include "histkit/adapt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "histkit/error.hpp"

namespace histkit::adapt {
namespace {

void check_same_shape(const Rows& a, const Rows& b, std::string_view what) {
  if (a.n != b.n || a.dim != b.dim || a.v.size() != a.n * a.dim || b.v.size() != b.n * b.dim) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": shape mismatch (" + std::to_string(a.n) + "x" +
                                                 std::to_string(a.dim) + " vs " + std::to_string(b.n) + "x" +
                                                 std::to_string(b.dim) + ")");
  }
}

// Unit rows and their original norms.
std::vector<double> unit_rows(const Rows& x, std::vector<double>& norms, std::string_view side) {
  std::vector<double> u(x.v.size());
  norms.assign(x.n, 0.0);
  for (std::size_t i = 0; i < x.n; ++i) {
    double ss = 0.0;
    for (double e : x.row(i)) ss += e * e;
    const double norm = std::sqrt(ss);
    if (!std::isfinite(norm)) {
      throw Error(ErrorCode::kNumeric, "mnrl_loss: non-finite value at " + std::string(side) + " row " + std::to_string(i));
    }
    if (!(norm > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "mnrl_loss: zero vector at " + std::string(side) + " row " + std::to_string(i));
    }
    norms[i] = norm;
    for (std::size_t d = 0; d < x.dim; ++d) u[i * x.dim + d] = x.v[i * x.dim + d] / norm;
  }
  return u;
}

}  // namespace

LossResult mnrl_loss(const Rows& a, const Rows& b, double scale, bool want_grad_b) {
  check_same_shape(a, b, "mnrl_loss");
  if (a.n < 2) throw Error(ErrorCode::kInvalidArgument, "mnrl_loss needs at least 2 pairs for in-batch negatives");
  const std::size_t n = a.n;
  const std::size_t dim = a.dim;

  std::vector<double> na, nb;
  const auto ua = unit_rows(a, na, "a");
  const auto ub = unit_rows(b, nb, "b");

  std::vector<double> sim(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += ua[i * dim + d] * ub[j * dim + d];
      sim[i * n + j] = s;
    }
  }

  // coef[i][j] = dL/dz_ij = (p_ij - [i == j]) / n
  std::vector<double> coef(n * n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zii = scale * sim[i * n + i];
    double zmax = zii;
    for (std::size_t j = 0; j < n; ++j) zmax = std::max(zmax, scale * sim[i * n + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(scale * sim[i * n + j] - zmax);
    if (zmax == zii) {
      // log(sum_j exp(z_ij - z_ii)) with the diagonal term split off keeps
      // precision when the positive dominates.
      double rest = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) rest += std::exp(scale * sim[i * n + j] - zii);
      }
      total += std::log1p(rest);
    } else {
      total += (zmax - zii) + std::log(denom);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp(scale * sim[i * n + j] - zmax) / denom;
      coef[i * n + j] = (p - (i == j ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }

  LossResult out;
  out.loss = total / static_cast<double>(n);
  out.grad_a = Rows(n, dim);
  // dz_ij/da_i = scale * (ub_j - s_ij ua_i) / |a_i|
  for (std::size_t i = 0; i < n; ++i) {
    auto g = out.grad_a.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double c = coef[i * n + j];
      const double s = sim[i * n + j];
      for (std::size_t d = 0; d < dim; ++d) g[d] += c * (ub[j * dim + d] - s * ua[i * dim + d]);
    }
    for (auto& x : g) x *= scale / na[i];
  }
  if (want_grad_b) {
    out.grad_b = Rows(n, dim);
    // dz_ij/db_j = scale * (ua_i - s_ij ub_j) / |b_j|
    for (std::size_t j = 0; j < n; ++j) {
      auto g = out.grad_b.row(j);
      for (std::size_t i = 0; i < n; ++i) {
        const double c = coef[i * n + j];
        const double s = sim[i * n + j];
        for (std::size_t d = 0; d < dim; ++d) g[d] += c * (ua[i * dim + d] - s * ub[j * dim + d]);
      }
      for (auto& x : g) x *= scale / nb[j];
    }
  }
  return out;
}

LossResult distill_loss(const Rows& s, const Rows& t) {
  check_same_shape(s, t, "distill_loss");
  if (s.n == 0 || s.dim == 0) throw Error(ErrorCode::kInvalidArgument, "distill_loss: empty batch");
  const double denom = static_cast<double>(s.n * s.dim);
  LossResult out;
  out.grad_a = Rows(s.n, s.dim);
  double total = 0.0;
  for (std::size_t k = 0; k < s.v.size(); ++k) {
    const double diff = s.v[k] - t.v[k];
    total += diff * diff;
    out.grad_a.v[k] = 2.0 * diff / denom;
  }
  out.loss = total / denom;
  return out;
}

}  // namespace histkit::adapt
