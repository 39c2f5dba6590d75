#include "bartree/estimation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bartree/numeric.hpp"
#include "family_walk.hpp"

namespace bartree {

namespace {

/// Compensated entries (count, sum X, sum X^2) of a 2x2 design block.
struct BlockSums {
  CompensatedSum n, x, xx;

  void add(double xk) {
    n += 1.0;
    x += xk;
    xx += xk * xk;
  }
  void add(const BlockSums& o) {
    n += o.n;
    x += o.x;
    xx += o.xx;
  }
  Mat2 matrix() const { return Mat2::symmetric(n.value(), x.value(), xx.value()); }
};

/// Contributions of the mothers of one generation.
struct GenerationSums {
  BlockSums block[2];
  BlockSums both;
  CompensatedSum rhs[4];  // sum delta X_{2k}, delta X_k X_{2k}, delta X_{2k+1}, delta X_k X_{2k+1}
  std::uint64_t mothers = 0;
  std::uint64_t pairs = 0;

  void add(const GenerationSums& o) {
    for (int i = 0; i < 2; ++i) block[i].add(o.block[i]);
    both.add(o.both);
    for (int i = 0; i < 4; ++i) rhs[i] += o.rhs[i];
    mothers += o.mothers;
    pairs += o.pairs;
  }
};

GenerationSums generation_sums(const ObservedTree& tree, Generation g) {
  GenerationSums s;
  const auto xs = tree.values(g);
  const auto kid_values = tree.values(g + 1);
  s.mothers = xs.size();
  detail::for_each_family(tree.mask(), g, [&](std::size_t i, NodeId, const detail::ChildSlot* c) {
    const double xk = xs[i];
    for (int t = 0; t < 2; ++t) {
      if (!c[t].present) continue;
      const double child = kid_values[c[t].index];
      s.block[t].add(xk);
      s.rhs[2 * t] += child;
      s.rhs[2 * t + 1] += xk * child;
    }
    if (c[0].present && c[1].present) {
      s.both.add(xk);
      ++s.pairs;
    }
  });
  return s;
}

struct BlockSolve {
  Vec4 theta{};
  bool regularized = false;
};

BlockSolve solve_blocks(const Mat2& s0, const Mat2& s1, const Vec4& rhs) {
  BlockSolve out;
  out.regularized = needs_regularization(s0) || needs_regularization(s1);
  const Mat2 shift = out.regularized ? Mat2::identity() : Mat2{};
  const Vec2 even = solve(s0 + shift, {rhs[0], rhs[1]});
  const Vec2 odd = solve(s1 + shift, {rhs[2], rhs[3]});
  out.theta = {even[0], even[1], odd[0], odd[1]};
  return out;
}

void require_depth(const ObservedTree& tree, Generation needed, const char* what) {
  if (tree.depth() < needed) {
    throw ValidationError(std::string(what) + " needs data down to generation " + std::to_string(needed) +
                          " but the tree depth is " + std::to_string(tree.depth()));
  }
}

}  // namespace

Mat4 DesignMatrices::gamma(double sigma2, double rho) const {
  return Mat4::block(sigma2 * S0, rho * S01, rho * S01, sigma2 * S1);
}

bool needs_regularization(const Mat2& block) {
  return min_eigenvalue_sym(block) < 1e-10 * (1.0 + block.trace());
}

DesignMatrices accumulate_design(const ObservedTree& tree, Generation n) {
  require_depth(tree, n + 1, "design matrices of T_n");
  GenerationSums total;
  for (Generation g = 0; g <= n; ++g) total.add(generation_sums(tree, g));
  DesignMatrices d;
  d.n = n;
  d.S0 = total.block[0].matrix();
  d.S1 = total.block[1].matrix();
  d.S01 = total.both.matrix();
  d.observed = total.mothers;
  d.pairs = total.pairs;
  d.last_generation = tree.mask().generation_size(n);
  return d;
}

Mat4 ThetaEstimate::sigma_effective() const {
  const Mat2 shift = regularized ? Mat2::identity() : Mat2{};
  return Mat4::block_diag(design.S0 + shift, design.S1 + shift);
}

Mat4 ThetaEstimate::gamma_plugin() const { return design.gamma(sigma2, rho.value_or(0.0)); }

ThetaEstimate estimate_theta(const ObservedTree& tree, Generation n) {
  if (n < 1) throw ValidationError("theta estimation needs n >= 1");
  require_depth(tree, n, "theta estimation");
  if (tree.mask().generation_size(1) == 0) {
    throw ExtinctionError("no observed daughter of the root: nothing to estimate");
  }

  ThetaEstimate est;
  est.n = n;
  GenerationSums cum;
  for (Generation g = 0; g < n; ++g) {
    cum.add(generation_sums(tree, g));
    const Vec4 rhs{cum.rhs[0].value(), cum.rhs[1].value(), cum.rhs[2].value(), cum.rhs[3].value()};
    const BlockSolve sol = solve_blocks(cum.block[0].matrix(), cum.block[1].matrix(), rhs);
    est.path.push_back(sol.theta);
    est.path_regularized.push_back(sol.regularized);
    est.path_observed.push_back(cum.mothers);
  }
  est.theta = est.path.back();
  est.regularized = est.path_regularized.back();
  est.design.n = n - 1;
  est.design.S0 = cum.block[0].matrix();
  est.design.S1 = cum.block[1].matrix();
  est.design.S01 = cum.both.matrix();
  est.design.observed = cum.mothers;
  est.design.pairs = cum.pairs;
  est.design.last_generation = tree.mask().generation_size(n - 1);
  est.observed = tree.mask().subtree_count(n);
  est.pairs = cum.pairs;

  // Two residual conventions: the final fit theta_n for every mother, and
  // the predictive fit theta_l for mothers in G_l.
  CompensatedSum sq, quart, cross, cross_sq, sq_pred, cross_pred;
  for (Generation g = 0; g < n; ++g) {
    const bool own = g >= 1 && !est.path_regularized[g - 1];
    const Vec4& pred = own ? est.path[g - 1] : est.theta;
    const Vec4& fit = est.theta;
    const auto xs = tree.values(g);
    const auto kid_values = tree.values(g + 1);
    detail::for_each_family(tree.mask(), g, [&](std::size_t i, NodeId, const detail::ChildSlot* c) {
      double res[2] = {0.0, 0.0};
      double res_pred[2] = {0.0, 0.0};
      for (int t = 0; t < 2; ++t) {
        if (!c[t].present) continue;
        const double child = kid_values[c[t].index];
        res[t] = child - fit[2 * t] - fit[2 * t + 1] * xs[i];
        res_pred[t] = child - pred[2 * t] - pred[2 * t + 1] * xs[i];
        const double r2 = res[t] * res[t];
        sq += r2;
        quart += r2 * r2;
        sq_pred += res_pred[t] * res_pred[t];
      }
      if (c[0].present && c[1].present) {
        cross += res[0] * res[1];
        cross_sq += res[0] * res[0] * res[1] * res[1];
        cross_pred += res_pred[0] * res_pred[1];
      }
    });
  }
  const double obs = static_cast<double>(est.observed);
  est.sigma2 = sq.value() / obs;
  est.tau4 = quart.value() / obs;
  est.sigma2_predictive = sq_pred.value() / obs;
  if (est.pairs > 0) {
    const double pairs = static_cast<double>(est.pairs);
    est.rho = cross.value() / pairs;
    est.nu2tau4 = cross_sq.value() / pairs;
    est.rho_predictive = cross_pred.value() / pairs;
  } else {
    est.rho_note = "no mother with both daughters observed in T_" + std::to_string(n - 1);
  }
  return est;
}

MartingaleDiagnostics martingale_diagnostics(const ObservedTree& tree, const BarParams& theta_true,
                                             Generation up_to_n) {
  if (!tree.has_noise()) throw ValidationError("martingale diagnostics need a tree with a true-noise record");
  if (up_to_n < 1) throw ValidationError("martingale diagnostics need n >= 1");
  require_depth(tree, up_to_n, "martingale diagnostics");
  const ThetaEstimate est = estimate_theta(tree, up_to_n);
  const Vec4 truth = theta_true.as_vector();

  MartingaleDiagnostics out;
  CompensatedSum m[4];
  BlockSums block[2];
  CompensatedSum running;
  for (Generation g = 0; g < up_to_n; ++g) {
    const auto xs = tree.values(g);
    const auto eps = tree.noise(g + 1);
    detail::for_each_family(tree.mask(), g, [&](std::size_t i, NodeId, const detail::ChildSlot* c) {
      for (int t = 0; t < 2; ++t) {
        if (!c[t].present) continue;
        const double e = eps[c[t].index];
        m[2 * t] += e;
        m[2 * t + 1] += xs[i] * e;
        block[t].add(xs[i]);
      }
    });
    const Vec4 M{m[0].value(), m[1].value(), m[2].value(), m[3].value()};
    const Mat2 s0 = block[0].matrix();
    const Mat2 s1 = block[1].matrix();
    const bool reg = needs_regularization(s0) || needs_regularization(s1);
    const Mat2 shift = reg ? Mat2::identity() : Mat2{};
    const Vec2 w0 = solve(s0 + shift, {M[0], M[1]});
    const Vec2 w1 = solve(s1 + shift, {M[2], M[3]});
    const double V = M[0] * w0[0] + M[1] * w0[1] + M[2] * w1[0] + M[3] * w1[1];
    running += V;

    double gap = std::numeric_limits<double>::quiet_NaN();
    if (!reg) {
      const Vec4& th = est.path[g];
      const Vec4 diff{th[0] - truth[0], th[1] - truth[1], th[2] - truth[2], th[3] - truth[3]};
      const Vec4 lhs = Mat4::block_diag(s0, s1) * diff;
      double num = 0.0;
      double den = 0.0;
      for (int r = 0; r < 4; ++r) {
        num = std::max(num, std::abs(lhs[r] - M[r]));
        den = std::max(den, std::abs(M[r]));
      }
      gap = num / std::max(den, 1e-300);
    }

    out.M.push_back(M);
    out.V.push_back(V);
    out.qsl_running.push_back(running.value() / static_cast<double>(g + 1));
    out.identity_gap.push_back(gap);
    out.regularized.push_back(reg);
  }
  return out;
}

NoiseFunctionals true_noise_functionals(const ObservedTree& tree, Generation n) {
  if (!tree.has_noise()) throw ValidationError("true-noise functionals need a tree with a true-noise record");
  if (n < 1) throw ValidationError("true-noise functionals need n >= 1");
  require_depth(tree, n, "true-noise functionals");
  CompensatedSum sq, cross;
  std::uint64_t pairs = 0;
  for (Generation g = 0; g < n; ++g) {
    const auto eps = tree.noise(g + 1);
    detail::for_each_family(tree.mask(), g, [&](std::size_t, NodeId, const detail::ChildSlot* c) {
      for (int t = 0; t < 2; ++t)
        if (c[t].present) sq += eps[c[t].index] * eps[c[t].index];
      if (c[0].present && c[1].present) {
        cross += eps[c[0].index] * eps[c[1].index];
        ++pairs;
      }
    });
  }
  NoiseFunctionals f;
  f.sigma2 = sq.value() / static_cast<double>(tree.mask().subtree_count(n));
  if (pairs > 0) f.rho = cross.value() / static_cast<double>(pairs);
  return f;
}

}  // namespace bartree
