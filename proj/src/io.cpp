#include "bartree/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "bartree/distributions.hpp"
#include "json.hpp"

namespace bartree {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw ValidationError(source + ":" + std::to_string(line) + ": " + what);
}

std::uint64_t parse_id(const std::string& field, const std::string& source, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    fail_at(source, line, "malformed node id '" + field + "'");
  }
  if (v == 0) fail_at(source, line, "node id 0 is not a tree node (ids start at 1)");
  return v;
}

double parse_real(const std::string& field, const std::string& source, std::size_t line) {
  if (field.empty()) fail_at(source, line, "missing value");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || !std::isfinite(v)) {
    fail_at(source, line, "malformed number '" + field + "'");
  }
  return v;
}

/// Header directives `# key=value`.
void read_directive(const std::string& comment, std::optional<Generation>& depth, int& root_type,
                    const std::string& source, std::size_t line) {
  const std::string body = trim(std::string_view(comment).substr(1));
  const auto eq = body.find('=');
  if (eq == std::string::npos) return;
  const std::string key = trim(body.substr(0, eq));
  const std::string value = trim(body.substr(eq + 1));
  if (key == "depth") {
    Generation d = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), d);
    if (ec != std::errc() || ptr != value.data() + value.size()) fail_at(source, line, "malformed depth '" + value + "'");
    depth = d;
  } else if (key == "root_type") {
    if (value != "0" && value != "1") fail_at(source, line, "root_type must be 0 or 1");
    root_type = value == "1" ? 1 : 0;
  }
}

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

/// Data lines split on commas, plus header directives.
std::vector<Line> tokenize(const std::string& text, const std::string& source, std::optional<Generation>& depth,
                           int& root_type) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      read_directive(line, depth, root_type, source, number);
      continue;
    }
    Line l{number, {}};
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      l.fields.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    out.push_back(std::move(l));
  }
  return out;
}

/// Duplicate, root and prefix-closure checks with line numbers.
void check_ids(const std::vector<std::pair<NodeId, std::size_t>>& id_lines, const std::string& source) {
  std::map<NodeId, std::size_t> seen;
  for (const auto& [k, line] : id_lines) {
    const auto [it, inserted] = seen.emplace(k, line);
    if (!inserted) {
      fail_at(source, line, "duplicate node id " + std::to_string(k) + " (first seen on line " +
                                std::to_string(it->second) + ")");
    }
  }
  if (!seen.count(1)) throw ValidationError(source + ": the root node 1 is missing");
  for (const auto& [k, line] : id_lines) {
    if (k >= 2 && !seen.count(k / 2)) {
      fail_at(source, line, "orphan node " + std::to_string(k) + ": its mother " + std::to_string(k / 2) +
                                " is not observed");
    }
  }
}

Generation resolve_depth(std::optional<Generation> requested, std::optional<Generation> declared,
                         Generation deepest, const std::string& source) {
  const Generation d = requested.value_or(declared.value_or(deepest));
  if (d < deepest) {
    throw ValidationError(source + ": depth " + std::to_string(d) + " is shallower than the deepest record (generation " +
                          std::to_string(deepest) + ")");
  }
  check_depth(d);
  return d;
}

ordered_json law_json(const OffspringLaw& l) {
  return {{"p00", l.p00}, {"p10", l.p10}, {"p01", l.p01}, {"p11", l.p11}};
}

ordered_json ci_json(const ConfidenceInterval& ci) {
  return {{"point", ci.point}, {"low", ci.low}, {"high", ci.high}, {"level", ci.level}};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

OffspringLaw parse_offspring(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object with p00, p10, p01, p11");
  for (const auto& [key, _] : j.items()) {
    if (key != "p00" && key != "p10" && key != "p01" && key != "p11") {
      throw ValidationError(where + ": unknown field '" + key + "'");
    }
  }
  return {get_or(j, "p00", 0.0), get_or(j, "p10", 0.0), get_or(j, "p01", 0.0), get_or(j, "p11", 0.0)};
}

ordered_json mc_config_json(const McConfig& c) {
  ordered_json depths = ordered_json::array();
  for (Generation d : c.depths) depths.push_back(d);
  return {{"bar", {{"a", c.bar.a}, {"b", c.bar.b}, {"c", c.bar.c}, {"d", c.bar.d}}},
          {"noise", {{"sigma2", c.noise.sigma2}, {"rho_prime", c.noise.rho_prime}, {"family", "gaussian"}}},
          {"law", {{"type0", law_json(c.law.type[0])}, {"type1", law_json(c.law.type[1])}}},
          {"root_type", c.root_type},
          {"x1", c.x1},
          {"depths", depths},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"condition_on_survival", c.condition_on_survival},
          {"level", c.level},
          {"max_attempts", c.max_attempts}};
}

/// JSON has no infinity; open band edges are written as null.
ordered_json real_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

}  // namespace

std::string format_real(double x) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LineageFile parse_lineage_text(const std::string& text, const std::string& source, std::optional<Generation> depth) {
  std::optional<Generation> declared;
  int root_type = 0;
  const auto lines = tokenize(text, source, declared, root_type);
  std::vector<std::pair<NodeId, double>> records;
  std::vector<std::pair<NodeId, std::size_t>> id_lines;
  Generation deepest = 0;
  for (const Line& l : lines) {
    if (l.fields.size() != 2) fail_at(source, l.number, "expected 'k,x' with exactly two fields");
    const NodeId k = parse_id(l.fields[0], source, l.number);
    if (generation_of(k) > kMaxDepth) {
      fail_at(source, l.number, "node id " + std::to_string(k) + " is beyond the supported depth " +
                                    std::to_string(kMaxDepth));
    }
    records.emplace_back(k, parse_real(l.fields[1], source, l.number));
    id_lines.emplace_back(k, l.number);
    deepest = std::max(deepest, generation_of(k));
  }
  if (records.empty()) throw ValidationError(source + ": no records");
  check_ids(id_lines, source);
  LineageFile out;
  out.declared_depth = declared;
  out.records = records.size();
  out.tree = ObservedTree::from_records(std::move(records), resolve_depth(depth, declared, deepest, source), root_type);
  return out;
}

LineageFile parse_lineage(const std::string& path, std::optional<Generation> depth) {
  return parse_lineage_text(read_text_file(path), path, depth);
}

void write_lineage(std::ostream& os, const ObservedTree& tree) {
  os << "# bartree lineage: k,x\n";
  os << "# depth=" << tree.depth() << "\n";
  os << "# root_type=" << tree.mask().root_type() << "\n";
  char buf[64];
  for (const auto& [k, x] : tree.records()) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << k << ',' << buf << '\n';
  }
}

void write_noise(std::ostream& os, const ObservedTree& tree) {
  if (!tree.has_noise()) throw ValidationError("the tree carries no noise record");
  os << "# bartree noise: k,eps\n";
  char buf[64];
  for (Generation g = 1; g <= tree.depth(); ++g) {
    const auto ids = tree.ids(g);
    const auto eps = tree.noise(g);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", eps[i]);
      os << ids[i] << ',' << buf << '\n';
    }
  }
}

ObservationMask parse_mask_text(const std::string& text, const std::string& source, std::optional<Generation> depth,
                                int root_type) {
  std::optional<Generation> declared;
  int declared_root = root_type;
  const auto lines = tokenize(text, source, declared, declared_root);
  std::vector<NodeId> ids;
  std::vector<std::pair<NodeId, std::size_t>> id_lines;
  Generation deepest = 0;
  for (const Line& l : lines) {
    if (l.fields.empty() || l.fields.size() > 2) fail_at(source, l.number, "expected a node id per line");
    const NodeId k = parse_id(l.fields[0], source, l.number);
    if (generation_of(k) > kMaxDepth) fail_at(source, l.number, "node id beyond the supported depth");
    ids.push_back(k);
    id_lines.emplace_back(k, l.number);
    deepest = std::max(deepest, generation_of(k));
  }
  if (ids.empty()) throw ValidationError(source + ": no node ids");
  check_ids(id_lines, source);
  return ObservationMask(std::move(ids), resolve_depth(depth, declared, deepest, source), declared_root);
}

void write_mask(std::ostream& os, const ObservationMask& mask) {
  os << "# bartree mask: k\n";
  os << "# depth=" << mask.depth() << "\n";
  os << "# root_type=" << mask.root_type() << "\n";
  for (NodeId k : mask.nodes()) os << k << '\n';
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(source + ": the configuration must be a JSON object");
  const std::string schema = get_or<std::string>(j, "schema", "");
  if (schema != kConfigSchema) {
    throw ValidationError(source + ": schema field must be \"" + std::string(kConfigSchema) + "\" (found \"" + schema +
                          "\")");
  }
  static const char* const known[] = {"schema", "experiment", "bar",        "noise",     "law",
                                      "root_type", "x1",      "depths",     "replicates", "seed",
                                      "condition_on_survival", "level", "max_attempts"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw ValidationError(source + ": unknown field '" + key + "'");
    }
  }

  RunConfig cfg;
  try {
    if (j.contains("experiment")) cfg.experiment = parse_experiment(j.at("experiment").get<std::string>());
    McConfig& mc = cfg.mc;
    if (!j.contains("bar")) throw ValidationError(source + ": missing 'bar' with a, b, c, d");
    const json& bar = j.at("bar");
    const bool unchecked = get_or(bar, "unchecked", false);
    mc.bar = BarParams(bar.at("a").get<double>(), bar.at("b").get<double>(), bar.at("c").get<double>(),
                       bar.at("d").get<double>(), unchecked ? StabilityCheck::skip : StabilityCheck::enforce);
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      const std::string family = get_or<std::string>(n, "family", "gaussian");
      if (family != "gaussian") throw ValidationError(source + ": unsupported noise family '" + family + "'");
      mc.noise = NoiseParams(get_or(n, "sigma2", 1.0), get_or(n, "rho_prime", 0.0));
    }
    if (!j.contains("law") || (j.at("law").is_string() && j.at("law").get<std::string>() == "full")) {
      mc.law = ReproductionLaw::full_observation();
    } else {
      const json& l = j.at("law");
      if (l.contains("symmetric")) {
        mc.law = ReproductionLaw::symmetric(parse_offspring(l.at("symmetric"), source + ": law.symmetric"));
      } else {
        mc.law.type[0] = parse_offspring(l.at("type0"), source + ": law.type0");
        mc.law.type[1] = parse_offspring(l.at("type1"), source + ": law.type1");
      }
    }
    mc.law.validate();
    mc.root_type = get_or(j, "root_type", 0);
    mc.x1 = get_or(j, "x1", 0.0);
    if (j.contains("depths")) mc.depths = j.at("depths").get<std::vector<Generation>>();
    mc.replicates = get_or<std::uint64_t>(j, "replicates", 1);
    mc.seed = get_or<std::uint64_t>(j, "seed", 0);
    mc.condition_on_survival = get_or(j, "condition_on_survival", true);
    mc.level = get_or(j, "level", 0.95);
    mc.max_attempts = get_or<std::uint64_t>(j, "max_attempts", 0);
  } catch (const json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) { return parse_config_text(read_text_file(path), path); }

std::string config_to_json(const RunConfig& cfg, int indent) {
  ordered_json j = {{"schema", kConfigSchema}};
  if (cfg.experiment) j["experiment"] = experiment_name(*cfg.experiment);
  const ordered_json mc = mc_config_json(cfg.mc);
  for (const auto& [k, v] : mc.items()) j[k] = v;
  return j.dump(indent);
}

std::string report_to_json(const McReport& report, int indent) {
  ordered_json stats = ordered_json::array();
  for (const TrackedStatistic& s : report.stats) {
    stats.push_back({{"name", s.name},
                     {"depth", s.depth},
                     {"summary", s.summary},
                     {"empirical", real_or_null(s.empirical)},
                     {"target", real_or_null(s.target)},
                     {"low", real_or_null(s.low)},
                     {"high", real_or_null(s.high)},
                     {"tolerance", s.tolerance},
                     {"mc_std_error", real_or_null(s.mc_std_error)},
                     {"count", s.count},
                     {"informational", s.informational},
                     {"pass", s.pass}});
  }
  ordered_json depths = ordered_json::array();
  for (const DepthCount& d : report.depth_counts) {
    depths.push_back({{"depth", d.depth}, {"used", d.used}, {"extinct", d.extinct}});
  }
  ordered_json config = {{"schema", kConfigSchema}, {"experiment", report.experiment}};
  const ordered_json mc = mc_config_json(report.config);
  for (const auto& [k, v] : mc.items()) config[k] = v;
  const ordered_json j = {{"schema", kReportSchema},
                          {"kind", "mc_report"},
                          {"experiment", report.experiment},
                          {"config", config},
                          {"replicates",
                           {{"attempted", report.attempted},
                            {"surviving", report.surviving},
                            {"extinct", report.extinct},
                            {"survival_target", report.survival_target}}},
                          {"depth_counts", depths},
                          {"stats", stats},
                          {"notes", report.notes},
                          {"pass", report.pass()}};
  return j.dump(indent);
}

void write_report_rows(std::ostream& os, const McReport& report) {
  for (std::size_t i = 0; i < report.columns.size(); ++i) os << (i ? "," : "") << report.columns[i];
  os << '\n';
  char buf[64];
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
}

std::string estimate_report_json(const ObservedTree& tree, const ThetaEstimate& est, double level,
                                 const std::string& input, int indent) {
  const ThetaInference ti = theta_cis(est, level);
  const NoiseInference ni = sigma_rho_cis(est, LimitsMode::plug_in, nullptr, level);
  const char* const names[4] = {"a", "b", "c", "d"};

  ordered_json coef = ordered_json::object();
  for (int j = 0; j < 4; ++j) {
    coef[names[j]] = {{"estimate", est.theta[j]},
                      {"std_error", std::sqrt(std::max(ti.covariance(j, j), 0.0))},
                      {"ci", ci_json(ti.ci[j])}};
  }
  ordered_json tests = ordered_json::array();
  std::vector<std::string> warnings = ti.warnings;
  warnings.insert(warnings.end(), ni.warnings.begin(), ni.warnings.end());
  for (WaldKind k : {WaldKind::pair, WaldKind::intercept, WaldKind::slope}) {
    const char* null_text = k == WaldKind::pair ? "(a,b)=(c,d)" : (k == WaldKind::intercept ? "a=c" : "b=d");
    try {
      const WaldTest t = wald_test(est, k);
      tests.push_back({{"test", wald_name(k)},
                       {"null", null_text},
                       {"statistic", t.statistic},
                       {"df", t.df},
                       {"p_value", t.p_value}});
    } catch (const DegeneracyError& e) {
      tests.push_back({{"test", wald_name(k)}, {"null", null_text}, {"error", e.what()}});
      warnings.push_back(std::string(wald_name(k)) + " test: " + e.what());
    }
  }

  ordered_json pi = nullptr;
  try {
    const PiEstimate p = estimate_pi(tree.mask().depth() == est.n ? tree.mask() : tree.truncated(est.n).mask(), level);
    pi = {{"estimate", p.pi_hat}, {"std_error", p.std_error}, {"ci", {{"low", p.low}, {"high", p.high}}}};
  } catch (const Error& e) {
    warnings.push_back(std::string("pi hat: ") + e.what());
  }

  ordered_json noise = {{"sigma2", {{"estimate", est.sigma2}, {"ci", ci_json(ni.sigma2)}}},
                        {"rho", ni.rho ? ordered_json{{"estimate", *est.rho}, {"ci", ci_json(*ni.rho)}}
                                       : ordered_json{{"estimate", nullptr}, {"note", est.rho_note}}}};

  const ordered_json j = {{"schema", kReportSchema},
                          {"kind", "estimate"},
                          {"config", {{"input", input}, {"depth", est.n}, {"level", level},
                                      {"root_type", tree.mask().root_type()}}},
                          {"n", est.n},
                          {"observed_cells", est.observed},
                          {"observed_pairs", est.pairs},
                          {"design_cells", est.design.observed},
                          {"regularized", est.regularized},
                          {"coefficients", coef},
                          {"noise", noise},
                          {"wald_tests", tests},
                          {"pi", pi},
                          {"warnings", warnings}};
  return j.dump(indent);
}

}  // namespace bartree
