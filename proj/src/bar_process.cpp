#include "bartree/bar_process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bartree/rng.hpp"

namespace bartree {

BarParams::BarParams(double a_, double b_, double c_, double d_, StabilityCheck check) : a(a_), b(b_), c(c_), d(d_) {
  if (check == StabilityCheck::enforce) {
    const double beta = std::max(std::abs(b), std::abs(d));
    if (!(beta > 0.0 && beta < 1.0)) {
      throw ValidationError("BAR coefficients must satisfy 0 < max(|b|,|d|) < 1 (got b=" + std::to_string(b) +
                            ", d=" + std::to_string(d) + ")");
    }
  }
}

NoiseParams::NoiseParams(double sigma2_, double rho_prime_, NoiseFamily family_)
    : sigma2(sigma2_), rho_prime(rho_prime_), family(family_) {
  validate();
}

void NoiseParams::validate() const {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ValidationError("noise variance must be finite and >= 0");
  if (!(std::abs(rho_prime) <= 1.0)) {
    throw ValidationError("sister-noise correlation must satisfy |rho'| <= 1 (|rho| <= sigma^2)");
  }
}

NoiseMoments noise_moments(const NoiseParams& noise) {
  noise.validate();
  if (noise.family != NoiseFamily::gaussian) throw ValidationError("unsupported noise family");
  // Isserlis identities for a centred bivariate normal with correlation r.
  const double s4 = noise.sigma2 * noise.sigma2;
  const double s8 = s4 * s4;
  const double r2 = noise.rho_prime * noise.rho_prime;
  NoiseMoments m;
  m.tau4 = 3.0 * s4;
  m.nu2 = (1.0 + 2.0 * r2) / 3.0;
  m.kappa8 = 105.0 * s8;
  m.lambda4 = (9.0 + 72.0 * r2 + 24.0 * r2 * r2) / 105.0;
  return m;
}

ObservedTree::ObservedTree(ObservationMask mask, std::vector<std::vector<double>> values,
                           std::optional<std::vector<std::vector<double>>> noise)
    : mask_(std::move(mask)), values_(std::move(values)), noise_(std::move(noise)) {
  values_.resize(mask_.depth() + 1);
  for (Generation g = 0; g <= mask_.depth(); ++g) {
    if (values_[g].size() != mask_.generation(g).size()) {
      throw ValidationError("value count does not match observed cells in generation " + std::to_string(g));
    }
  }
  if (noise_) {
    noise_->resize(mask_.depth() + 1);
    for (Generation g = 0; g <= mask_.depth(); ++g)
      if ((*noise_)[g].size() != mask_.generation(g).size()) {
        throw ValidationError("noise count does not match observed cells in generation " + std::to_string(g));
      }
  }
}

ObservedTree ObservedTree::from_records(std::vector<std::pair<NodeId, double>> records,
                                        std::optional<Generation> depth, int root_type) {
  std::sort(records.begin(), records.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<NodeId> ids;
  ids.reserve(records.size());
  Generation deepest = 0;
  for (const auto& [k, x] : records) {
    if (k == 0) throw ValidationError("node id 0 is not a tree node");
    ids.push_back(k);
    deepest = std::max(deepest, generation_of(k));
  }
  const Generation d = depth.value_or(deepest);
  ObservationMask mask(ids, d, root_type);
  std::vector<std::vector<double>> values(d + 1);
  for (const auto& [k, x] : records) values[generation_of(k)].push_back(x);
  return ObservedTree(std::move(mask), std::move(values));
}

std::span<const double> ObservedTree::values(Generation n) const {
  if (n > depth()) return {};
  return values_[n];
}

std::span<const double> ObservedTree::noise(Generation n) const {
  if (!noise_) throw ValidationError("tree carries no true-noise record");
  if (n > depth()) return {};
  return (*noise_)[n];
}

namespace {
std::optional<std::size_t> slot(const ObservationMask& mask, NodeId k) {
  if (k == 0) return std::nullopt;
  const Generation g = generation_of(k);
  const auto gen = mask.generation(g);
  const auto it = std::lower_bound(gen.begin(), gen.end(), k);
  if (it == gen.end() || *it != k) return std::nullopt;
  return static_cast<std::size_t>(it - gen.begin());
}
}  // namespace

std::optional<double> ObservedTree::value(NodeId k) const {
  const auto i = slot(mask_, k);
  if (!i) return std::nullopt;
  return values_[generation_of(k)][*i];
}

std::optional<double> ObservedTree::noise_of(NodeId k) const {
  if (!noise_ || k < 2) return std::nullopt;
  const auto i = slot(mask_, k);
  if (!i) return std::nullopt;
  return (*noise_)[generation_of(k)][*i];
}

ObservedTree ObservedTree::truncated(Generation d) const {
  d = std::min(d, depth());
  std::vector<std::vector<NodeId>> gens;
  for (Generation g = 0; g <= d; ++g) gens.emplace_back(mask_.generation(g).begin(), mask_.generation(g).end());
  auto mask = ObservationMask::from_generations(std::move(gens), d, mask_.root_type());
  std::vector<std::vector<double>> vals(values_.begin(), values_.begin() + d + 1);
  std::optional<std::vector<std::vector<double>>> eps;
  if (noise_) eps.emplace(noise_->begin(), noise_->begin() + d + 1);
  return ObservedTree(std::move(mask), std::move(vals), std::move(eps));
}

ObservedTree ObservedTree::rescaled(double scale, double shift) const {
  auto vals = values_;
  for (auto& g : vals)
    for (double& x : g) x = scale * x + shift;
  return ObservedTree(mask_, std::move(vals));
}

std::vector<std::pair<NodeId, double>> ObservedTree::records() const {
  std::vector<std::pair<NodeId, double>> out;
  out.reserve(mask_.size());
  for (Generation g = 0; g <= depth(); ++g) {
    const auto ids = mask_.generation(g);
    for (std::size_t i = 0; i < ids.size(); ++i) out.emplace_back(ids[i], values_[g][i]);
  }
  return out;
}

ObservedTree simulate_joint(const JointModel& model, Generation depth, std::uint64_t seed) {
  return simulate_joint(model.bar, model.noise, model.law, depth, model.root_type, model.x1, seed);
}

ObservedTree simulate_joint(const BarParams& bar, const NoiseParams& noise, const ReproductionLaw& law,
                            Generation depth, int root_type, double x1, std::uint64_t seed) {
  noise.validate();
  ObservationMask mask = simulate_mask(law, depth, root_type, derive_seed(seed, kMaskStream));
  CounterRng rng(derive_seed(seed, kNoiseStream));

  const double sd = std::sqrt(noise.sigma2);
  const double r = noise.rho_prime;
  const double r_perp = std::sqrt(std::max(0.0, 1.0 - r * r));

  std::vector<std::vector<double>> values(depth + 1);
  std::vector<std::vector<double>> eps(depth + 1);
  values[0] = {x1};
  eps[0] = {0.0};
  for (Generation g = 0; g < depth; ++g) {
    const auto mothers = mask.generation(g);
    const auto kids = mask.generation(g + 1);
    values[g + 1].resize(kids.size());
    eps[g + 1].resize(kids.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < mothers.size() && j < kids.size(); ++i) {
      const NodeId k = mothers[i];
      if (kids[j] / 2 != k) continue;
      // Sister pair (e_{2k}, e_{2k+1}) with covariance [[s2, rho], [rho, s2]].
      const double z0 = rng.normal();
      const double z1 = rng.normal();
      const double pair[2] = {sd * z0, sd * (r * z0 + r_perp * z1)};
      const double xk = values[g][i];
      while (j < kids.size() && kids[j] / 2 == k) {
        const int t = parity(kids[j]);
        eps[g + 1][j] = pair[t];
        values[g + 1][j] = bar.intercept(t) + bar.slope(t) * xk + pair[t];
        ++j;
      }
    }
  }
  return ObservedTree(std::move(mask), std::move(values), std::move(eps));
}

}  // namespace bartree
