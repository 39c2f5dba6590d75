#include "bartree/gw_observation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bartree/distributions.hpp"
#include "bartree/rng.hpp"

namespace bartree {

ReproductionLaw ReproductionLaw::full_observation() { return symmetric({0.0, 0.0, 0.0, 1.0}); }

ReproductionLaw ReproductionLaw::symmetric(const OffspringLaw& law) { return {{law, law}}; }

void ReproductionLaw::validate() const {
  for (int i = 0; i < 2; ++i) {
    const OffspringLaw& l = type[i];
    for (double p : {l.p00, l.p10, l.p01, l.p11}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("reproduction law of type " + std::to_string(i) + " has a probability outside [0,1]");
      }
    }
    if (std::abs(l.p00 + l.p10 + l.p01 + l.p11 - 1.0) > 1e-12) {
      throw ValidationError("reproduction law of type " + std::to_string(i) + " does not sum to 1");
    }
  }
}

Mat2 ReproductionLaw::descendants() const {
  Mat2 P;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) P(i, j) = type[i].mean_children(j);
  return P;
}

GWSpectral spectral(const ReproductionLaw& law) {
  law.validate();
  GWSpectral s;
  s.P = law.descendants();
  const Mat2& P = s.P;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (!(P(i, j) > 0.0)) {
        throw ValidationError("descendants matrix entry p_" + std::to_string(i) + std::to_string(j) +
                              " is zero; positivity of P is required");
      }
      s.sigma2(i, j) = P(i, j) * (1.0 - P(i, j));
    }
  }

  // Discriminant written as a sum of positive terms so that it never cancels.
  const double gap = P(0, 0) - P(1, 1);
  const double disc = gap * gap + 4.0 * P(0, 1) * P(1, 0);
  if (!(disc > 0.0)) throw DegeneracyError("dominant eigenvalue of P is not simple");
  const double root = std::sqrt(disc);
  s.pi = 0.5 * (P.trace() + root);
  s.pi_minor = 0.5 * (P.trace() - root);

  // zP = pi z  =>  z ∝ (p10, pi - p00);  Py = pi y  =>  y ∝ (p01, pi - p00).
  const double lead = s.pi - P(0, 0);
  const double zsum = P(1, 0) + lead;
  s.z = {P(1, 0) / zsum, lead / zsum};
  Vec2 y{P(0, 1), lead};
  const double zy = s.z[0] * y[0] + s.z[1] * y[1];
  s.y = {y[0] / zy, y[1] / zy};

  s.pbar11 = law.type[0].p11 * s.z[0] + law.type[1].p11 * s.z[1];
  s.supercritical = s.pi > 1.0;
  s.q = extinction_probabilities(law);
  return s;
}

Vec2 extinction_probabilities(const ReproductionLaw& law, double tol, std::uint64_t max_iter) {
  law.validate();
  Vec2 q{0.0, 0.0};
  for (std::uint64_t it = 0; it < max_iter; ++it) {
    const Vec2 next{law.type[0].generating(q[0], q[1]), law.type[1].generating(q[0], q[1])};
    const double step = std::max(std::abs(next[0] - q[0]), std::abs(next[1] - q[1]));
    q = next;
    if (step < tol) return q;
  }
  throw DegeneracyError("extinction fixed-point iteration did not converge");
}

ObservationMask::ObservationMask(std::vector<NodeId> observed, Generation depth, int root_type)
    : depth_(depth), root_type_(root_type) {
  check_depth(depth);
  if (root_type != 0 && root_type != 1) throw ValidationError("root type must be 0 or 1");
  std::sort(observed.begin(), observed.end());
  if (std::adjacent_find(observed.begin(), observed.end()) != observed.end()) {
    throw ValidationError("duplicate node id in observation mask");
  }
  if (observed.empty() || observed.front() != 1) throw ValidationError("observation mask must contain the root 1");
  generations_.assign(depth + 1, {});
  for (NodeId k : observed) {
    const Generation g = generation_of(k);
    if (g > depth) {
      throw ValidationError("node " + std::to_string(k) + " lies beyond depth " + std::to_string(depth));
    }
    if (k >= 2 && !std::binary_search(observed.begin(), observed.end(), k / 2)) {
      throw ValidationError("node " + std::to_string(k) + " is observed but its mother " + std::to_string(k / 2) +
                            " is not");
    }
    generations_[g].push_back(k);
  }
}

ObservationMask ObservationMask::from_generations(std::vector<std::vector<NodeId>> generations, Generation depth,
                                                  int root_type) {
  ObservationMask m;
  m.generations_ = std::move(generations);
  m.generations_.resize(depth + 1);
  m.depth_ = depth;
  m.root_type_ = root_type;
  return m;
}

std::span<const NodeId> ObservationMask::generation(Generation n) const {
  if (n >= generations_.size()) return {};
  return generations_[n];
}

bool ObservationMask::contains(NodeId k) const {
  if (k == 0) return false;
  const Generation g = generation_of(k);
  if (g >= generations_.size()) return false;
  return std::binary_search(generations_[g].begin(), generations_[g].end(), k);
}

std::uint64_t ObservationMask::generation_size(Generation n) const {
  return n < generations_.size() ? generations_[n].size() : 0;
}

std::uint64_t ObservationMask::subtree_count(Generation n) const {
  std::uint64_t total = 0;
  for (Generation g = 0; g <= n && g < generations_.size(); ++g) total += generations_[g].size();
  return total;
}

std::uint64_t ObservationMask::type_count(Generation n, int type) const {
  const auto gen = generation(n);
  return static_cast<std::uint64_t>(
      std::count_if(gen.begin(), gen.end(), [type](NodeId k) { return parity(k) == type; }));
}

bool ObservationMask::extinct() const {
  for (Generation g = 1; g <= depth_; ++g)
    if (generations_[g].empty()) return true;
  return false;
}

std::vector<NodeId> ObservationMask::nodes() const {
  std::vector<NodeId> all;
  all.reserve(size());
  for (const auto& g : generations_) all.insert(all.end(), g.begin(), g.end());
  return all;
}

ObservationMask simulate_mask(const ReproductionLaw& law, Generation depth, int root_type, std::uint64_t seed) {
  law.validate();
  check_depth(depth);
  if (root_type != 0 && root_type != 1) throw ValidationError("root type must be 0 or 1");
  CounterRng rng(seed);
  std::vector<std::vector<NodeId>> gens(depth + 1);
  gens[0] = {1};
  for (Generation g = 0; g < depth; ++g) {
    auto& next = gens[g + 1];
    next.reserve(2 * gens[g].size());
    for (NodeId k : gens[g]) {
      const OffspringLaw& l = law.type[k == 1 ? root_type : parity(k)];
      const double u = rng.uniform();
      bool even = false;
      bool odd = false;
      if (u < l.p00) {
      } else if (u < l.p00 + l.p10) {
        even = true;
      } else if (u < l.p00 + l.p10 + l.p01) {
        odd = true;
      } else {
        even = odd = true;
      }
      if (even) next.push_back(2 * k);
      if (odd) next.push_back(2 * k + 1);
    }
  }
  return ObservationMask::from_generations(std::move(gens), depth, root_type);
}

PiEstimate estimate_pi(const ObservationMask& mask, double level) {
  const Generation n = mask.depth();
  if (n < 1 || mask.generation_size(1) == 0) {
    throw ExtinctionError("the root has no observed children; the growth rate cannot be estimated");
  }
  double born = 0.0;     // sum_{l=1..n} |G*_l|
  double parents = 0.0;  // sum_{l=0..n-1} |G*_l|
  double pairs = 0.0;    // mothers in T_{n-1} with both children observed
  for (Generation g = 0; g < n; ++g) {
    parents += static_cast<double>(mask.generation_size(g));
    const auto kids = mask.generation(g + 1);
    born += static_cast<double>(kids.size());
    for (std::size_t i = 0; i + 1 < kids.size(); ++i)
      if (parity(kids[i]) == 0 && kids[i + 1] == kids[i] + 1) pairs += 1.0;
  }
  PiEstimate est;
  est.pi_hat = born / parents;
  // Offspring counts c_k in {0,1,2}: sum c_k^2 = born + 2 pairs.
  const double sum_sq = born + 2.0 * pairs;
  const double var = std::max(0.0, sum_sq / parents - est.pi_hat * est.pi_hat);
  est.std_error = std::sqrt(var / parents);
  const double z = two_sided_z(level);
  est.low = est.pi_hat - z * est.std_error;
  est.high = est.pi_hat + z * est.std_error;
  return est;
}

RenormalizedPopulation renormalized_population(const ObservationMask& mask, double pi) {
  if (!(pi > 1.0)) throw ValidationError("renormalised population needs a supercritical growth rate pi > 1");
  const Generation n = mask.depth();
  RenormalizedPopulation w;
  w.by_generation = static_cast<double>(mask.generation_size(n)) / std::pow(pi, n);
  w.by_subtree = (pi - 1.0) * static_cast<double>(mask.subtree_count(n)) / (std::pow(pi, n + 1) - 1.0);
  return w;
}

}  // namespace bartree
