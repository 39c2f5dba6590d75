#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "bartree/bar_process.hpp"
#include "bartree/gw_observation.hpp"

namespace bartree::fixtures {

/// Law with descendants matrix [[0.9, 0.4], [0.3, 0.8]] (pi = 1.2).
inline ReproductionLaw sparse_law() {
  ReproductionLaw law;
  law.type[0] = {0.05, 0.55, 0.05, 0.35};
  law.type[1] = {0.1, 0.1, 0.6, 0.2};
  return law;
}

/// Missing-data law with pi close to 1.72 and low extinction.
inline ReproductionLaw dense_law() {
  ReproductionLaw law;
  law.type[0] = {0.05, 0.10, 0.05, 0.80};
  law.type[1] = {0.08, 0.04, 0.10, 0.78};
  return law;
}

/// Noise-free recursion on the full tree of the given depth.
inline ObservedTree deterministic_full_tree(const BarParams& bar, Generation depth, double x1) {
  std::vector<std::pair<NodeId, double>> records{{1, x1}};
  std::map<NodeId, double> value{{1, x1}};
  for (NodeId k = 2; k < (NodeId{1} << (depth + 1)); ++k) {
    const int t = parity(k);
    value[k] = bar.intercept(t) + bar.slope(t) * value[k / 2];
    records.emplace_back(k, value[k]);
  }
  return ObservedTree::from_records(records, depth);
}

/// Dense least-squares reference: one regression per child type over the
/// observed mother-daughter pairs of T_{n-1}, solved by Eigen's QR.
struct ReferenceFit {
  Eigen::Vector4d theta;
  Eigen::Matrix2d S0, S1, S01;
  double rss = 0.0;
  double cross = 0.0;
  std::size_t pairs = 0;
};

inline ReferenceFit reference_fit(const ObservedTree& tree, Generation n) {
  ReferenceFit out;
  out.S0.setZero();
  out.S1.setZero();
  out.S01.setZero();
  std::vector<std::array<double, 3>> rows[2];  // (1, X_k, X_child)
  std::vector<std::pair<double, std::array<double, 2>>> pair_rows;
  for (const auto& [k, x] : tree.records()) {
    if (generation_of(k) >= n) continue;
    const auto even = tree.value(2 * k);
    const auto odd = tree.value(2 * k + 1);
    Eigen::Matrix2d phi;
    phi << 1.0, x, x, x * x;
    if (even) {
      rows[0].push_back({1.0, x, *even});
      out.S0 += phi;
    }
    if (odd) {
      rows[1].push_back({1.0, x, *odd});
      out.S1 += phi;
    }
    if (even && odd) {
      out.S01 += phi;
      pair_rows.push_back({x, {*even, *odd}});
    }
  }
  for (int t = 0; t < 2; ++t) {
    Eigen::MatrixXd A(rows[t].size(), 2);
    Eigen::VectorXd y(rows[t].size());
    for (std::size_t i = 0; i < rows[t].size(); ++i) {
      A(i, 0) = rows[t][i][0];
      A(i, 1) = rows[t][i][1];
      y(i) = rows[t][i][2];
    }
    const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
    out.theta.segment<2>(2 * t) = beta;
    out.rss += (y - A * beta).squaredNorm();
  }
  for (const auto& [x, kids] : pair_rows) {
    const double r0 = kids[0] - out.theta(0) - out.theta(1) * x;
    const double r1 = kids[1] - out.theta(2) - out.theta(3) * x;
    out.cross += r0 * r1;
  }
  out.pairs = pair_rows.size();
  return out;
}

inline Eigen::Matrix2d to_eigen(const Mat2& m) {
  Eigen::Matrix2d e;
  e << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
  return e;
}

inline Eigen::Matrix4d to_eigen(const Mat4& m) {
  Eigen::Matrix4d e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace bartree::fixtures
