#include "pfdg/basis.hpp"

#include <cmath>

namespace pfdg {

BasisFamily basis_family_from_string(const std::string& name) {
  if (name == "chebyshev") return BasisFamily::Chebyshev;
  if (name == "legendre") return BasisFamily::Legendre;
  if (name == "monomial") return BasisFamily::Monomial;
  throw ConfigError("unknown basis family: " + name);
}

std::string to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::Chebyshev: return "chebyshev";
    case BasisFamily::Legendre: return "legendre";
    case BasisFamily::Monomial: return "monomial";
  }
  return "?";
}

int basis_count(int dim, int p) {
  if (p < 0) return 0;
  switch (dim) {
    case 1: return p + 1;
    case 2: return (p + 1) * (p + 2) / 2;
    case 3: return (p + 1) * (p + 2) * (p + 3) / 6;
    default: throw Error("basis_count: dim must be 1, 2, or 3");
  }
}

Eigen::MatrixXi graded_lex_exponents(int dim, int p) {
  Eigen::MatrixXi exps(basis_count(dim, p), dim);
  int row = 0;
  for (int d = 0; d <= p; ++d) {
    if (dim == 1) {
      exps(row++, 0) = d;
    } else if (dim == 2) {
      for (int i = d; i >= 0; --i) {
        exps(row, 0) = i;
        exps(row, 1) = d - i;
        ++row;
      }
    } else {
      for (int i = d; i >= 0; --i)
        for (int j = d - i; j >= 0; --j) {
          exps(row, 0) = i;
          exps(row, 1) = j;
          exps(row, 2) = d - i - j;
          ++row;
        }
    }
  }
  return exps;
}

namespace {

// Values and first three derivatives of the 1D family polynomials T_0..T_p at
// xi, via the differentiated three-term recurrences (stable at xi = +-1).
void eval_family_1d(BasisFamily family, int p, double xi, double* v, double* d1, double* d2,
                    double* d3) {
  for (int k = 0; k <= p; ++k) v[k] = d1[k] = d2[k] = d3[k] = 0.0;
  v[0] = 1.0;
  if (p == 0) return;
  v[1] = xi;
  d1[1] = 1.0;
  switch (family) {
    case BasisFamily::Monomial:
      for (int k = 2; k <= p; ++k) {
        v[k] = xi * v[k - 1];
        d1[k] = v[k - 1] + xi * d1[k - 1];
        d2[k] = 2.0 * d1[k - 1] + xi * d2[k - 1];
        d3[k] = 3.0 * d2[k - 1] + xi * d3[k - 1];
      }
      break;
    case BasisFamily::Chebyshev:
      for (int k = 2; k <= p; ++k) {
        v[k] = 2.0 * xi * v[k - 1] - v[k - 2];
        d1[k] = 2.0 * v[k - 1] + 2.0 * xi * d1[k - 1] - d1[k - 2];
        d2[k] = 4.0 * d1[k - 1] + 2.0 * xi * d2[k - 1] - d2[k - 2];
        d3[k] = 6.0 * d2[k - 1] + 2.0 * xi * d3[k - 1] - d3[k - 2];
      }
      break;
    case BasisFamily::Legendre:
      for (int k = 2; k <= p; ++k) {
        const double a = (2.0 * k - 1.0) / k, b = (k - 1.0) / k;
        v[k] = a * xi * v[k - 1] - b * v[k - 2];
        d1[k] = a * (v[k - 1] + xi * d1[k - 1]) - b * d1[k - 2];
        d2[k] = a * (2.0 * d1[k - 1] + xi * d2[k - 1]) - b * d2[k - 2];
        d3[k] = a * (3.0 * d2[k - 1] + xi * d3[k - 1]) - b * d3[k - 2];
      }
      break;
  }
}

}  // namespace

BasisEval evaluate_basis(BasisFamily family, int dim, int p, const Vec3& midpoint, double h,
                         const Mat& points, int orders) {
  if (points.cols() != dim) throw Error("evaluate_basis: points/dim mismatch");
  const int n = static_cast<int>(points.rows());
  const int m = basis_count(dim, p);
  const Eigen::MatrixXi exps = graded_lex_exponents(dim, p);
  const double scale = 2.0 / h;  // d(xi)/dx, one factor per derivative order

  BasisEval out;
  out.m = m;
  out.dim = dim;
  out.values.resize(n, m);
  const int n2 = dim * (dim + 1) / 2;
  const int n3 = dim * (dim + 1) * (dim + 2) / 6;
  if (orders >= 1) out.grads.resize(n, m * dim);
  if (orders >= 2) out.hess.resize(n, m * n2);
  if (orders >= 3) out.third.resize(n, m * n3);

  // Second/third derivative pair/triple index tables (lexicographic).
  int pair_idx[3][3];
  {
    int c = 0;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) pair_idx[a][b] = pair_idx[b][a] = c++;
  }
  std::vector<std::array<int, 3>> triples;
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b)
      for (int c = b; c < dim; ++c) triples.push_back({a, b, c});

  // Per-axis 1D values/derivatives at each point.
  std::vector<double> f[3], f1[3], f2[3], f3[3];
  for (int a = 0; a < dim; ++a) {
    f[a].resize(p + 1);
    f1[a].resize(p + 1);
    f2[a].resize(p + 1);
    f3[a].resize(p + 1);
  }

  const double sp[4] = {1.0, scale, scale * scale, scale * scale * scale};
  for (int q = 0; q < n; ++q) {
    for (int a = 0; a < dim; ++a) {
      double xi = scale * (points(q, a) - midpoint[a]);
      eval_family_1d(family, p, xi, f[a].data(), f1[a].data(), f2[a].data(), f3[a].data());
    }
    for (int k = 0; k < m; ++k) {
      double val = 1.0;
      for (int a = 0; a < dim; ++a) val *= f[a][exps(k, a)];
      out.values(q, k) = val;
      if (orders < 1) continue;

      // One derivative factor per axis slot; chain rule contributes `scale`
      // per derivative order.
      auto deriv = [&](int da, int db, int dc) {
        // counts per axis
        int cnt[3] = {0, 0, 0};
        if (da >= 0) cnt[da]++;
        if (db >= 0) cnt[db]++;
        if (dc >= 0) cnt[dc]++;
        double prod = 1.0;
        int total = 0;
        for (int a = 0; a < dim; ++a) {
          const int e = exps(k, a);
          switch (cnt[a]) {
            case 0: prod *= f[a][e]; break;
            case 1: prod *= f1[a][e]; break;
            case 2: prod *= f2[a][e]; break;
            case 3: prod *= f3[a][e]; break;
          }
          total += cnt[a];
        }
        return prod * sp[total];
      };

      for (int a = 0; a < dim; ++a) out.grads(q, k * dim + a) = deriv(a, -1, -1);
      if (orders >= 2)
        for (int a = 0; a < dim; ++a)
          for (int b = a; b < dim; ++b) out.hess(q, k * n2 + pair_idx[a][b]) = deriv(a, b, -1);
      if (orders >= 3)
        for (size_t t = 0; t < triples.size(); ++t)
          out.third(q, k * n3 + static_cast<int>(t)) =
              deriv(triples[t][0], triples[t][1], triples[t][2]);
    }
  }
  return out;
}

}  // namespace pfdg
