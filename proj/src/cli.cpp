#include "bartree/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bartree/io.hpp"
#include "json.hpp"

namespace bartree {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ValidationError("failed writing '" + path + "'");
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("--condition-on-survival expects true or false, got '" + v + "'");
}

struct Options {
  std::string input;
  std::string output;
  std::string config;
  std::string noise_output;
  std::string rows_output;
  std::optional<unsigned> depth;
  std::optional<std::uint64_t> seed;
  std::optional<int> root_type;
  std::optional<std::string> condition_on_survival;
  std::optional<std::string> experiment;
  double level = 0.95;
  bool level_set = false;
};

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = parse_config(o.config);
  McConfig& mc = cfg.mc;
  if (o.seed) mc.seed = *o.seed;
  if (o.root_type) mc.root_type = *o.root_type;
  Generation depth = 0;
  if (o.depth) {
    depth = *o.depth;
  } else if (!mc.depths.empty()) {
    depth = mc.depths.back();
  } else {
    throw ValidationError("simulate needs --depth or a 'depths' entry in the configuration");
  }
  check_depth(depth);
  const JointModel model{mc.bar, mc.noise, mc.law, mc.root_type, mc.x1};
  const ObservedTree tree = simulate_joint(model, depth, mc.seed);

  std::ostringstream csv;
  csv << "# seed=" << mc.seed << "\n";
  write_lineage(csv, tree);
  emit(o.output, csv.str(), out);
  if (!o.noise_output.empty()) {
    std::ostringstream noise;
    noise << "# seed=" << mc.seed << "\n";
    write_noise(noise, tree);
    emit(o.noise_output, noise.str(), out);
  }
  if (!tree.mask().survives()) err << "warning: the simulated tree went extinct before generation " << depth << "\n";
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  LineageFile file = parse_lineage(o.input, o.depth);
  if (o.root_type) {
    file.tree = ObservedTree::from_records(file.tree.records(), file.tree.depth(), *o.root_type);
  }
  const ObservedTree& tree = file.tree;
  if (tree.depth() < 1) throw ValidationError("estimation needs a tree of depth >= 1");
  const ThetaEstimate est = estimate_theta(tree, tree.depth());
  const std::string report = estimate_report_json(tree, est, o.level, o.input);
  emit(o.output, report + "\n", out);
  if (est.regularized) err << "warning: the design matrix needed regularisation\n";
  return kExitOk;
}

int cmd_gw(const Options& o, std::ostream& out, std::ostream&) {
  const ObservationMask mask = parse_mask_text(read_text_file(o.input), o.input, o.depth, o.root_type.value_or(0));
  ordered_json sizes = ordered_json::array();
  for (Generation g = 0; g <= mask.depth(); ++g) {
    ordered_json row = {{"generation", g}, {"observed", mask.generation_size(g)}};
    if (g >= 1) {
      row["type0"] = mask.type_count(g, 0);
      row["type1"] = mask.type_count(g, 1);
    }
    sizes.push_back(row);
  }
  ordered_json j = {{"schema", kReportSchema},
                    {"kind", "gw"},
                    {"config", {{"input", o.input}, {"depth", mask.depth()}, {"level", o.level},
                                {"root_type", mask.root_type()}}},
                    {"observed_cells", mask.size()},
                    {"extinct", mask.extinct()},
                    {"generations", sizes}};
  try {
    const PiEstimate p = estimate_pi(mask, o.level);
    j["pi_hat"] = {{"estimate", p.pi_hat}, {"std_error", p.std_error}, {"ci", {{"low", p.low}, {"high", p.high}}}};
  } catch (const ExtinctionError& e) {
    j["pi_hat"] = {{"estimate", nullptr}, {"note", e.what()}};
  }
  if (!o.config.empty()) {
    const RunConfig cfg = parse_config(o.config);
    const Vec2 q = extinction_probabilities(cfg.mc.law);
    const Mat2 P = cfg.mc.law.descendants();
    ordered_json theory = {{"descendants", {{P(0, 0), P(0, 1)}, {P(1, 0), P(1, 1)}}},
                           {"extinction_probability", {q[0], q[1]}}};
    try {
      const GWSpectral s = spectral(cfg.mc.law);
      theory["pi"] = s.pi;
      theory["z"] = {s.z[0], s.z[1]};
      theory["supercritical"] = s.supercritical;
      if (s.supercritical) {
        const RenormalizedPopulation r = renormalized_population(mask, s.pi);
        theory["renormalized"] = {{"by_generation", r.by_generation}, {"by_subtree", r.by_subtree}};
      }
    } catch (const ValidationError& e) {
      theory["note"] = e.what();
    }
    j["theory"] = theory;
  }
  emit(o.output, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = parse_config(o.config);
  if (o.experiment) cfg.experiment = parse_experiment(*o.experiment);
  if (!cfg.experiment) throw ValidationError("verify needs an 'experiment' in the configuration or --experiment");
  McConfig& mc = cfg.mc;
  if (o.seed) mc.seed = *o.seed;
  if (o.root_type) mc.root_type = *o.root_type;
  if (o.depth) mc.depths = {*o.depth};
  if (o.condition_on_survival) mc.condition_on_survival = parse_bool(*o.condition_on_survival);
  if (o.level_set) mc.level = o.level;
  const McReport report = run_experiment(*cfg.experiment, mc);
  emit(o.output, report_to_json(report) + "\n", out);
  if (!o.rows_output.empty()) {
    std::ostringstream rows;
    write_report_rows(rows, report);
    emit(o.rows_output, rows.str(), out);
  }
  err << report.experiment << ": " << (report.pass() ? "all checks passed" : "some checks failed") << " ("
      << report.surviving << " surviving of " << report.attempted << " replicates)\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"bartree: asymmetric bifurcating autoregressive processes with missing data"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "simulate a lineage CSV from model parameters");
  simulate->add_option("--config", o.config, "model configuration JSON")->required();
  simulate->add_option("--depth", o.depth, "number of generations to simulate");
  simulate->add_option("--seed", o.seed, "random seed (overrides the configuration)");
  simulate->add_option("--root-type", o.root_type, "type of the root cell (0 or 1)");
  simulate->add_option("--output", o.output, "lineage CSV path (default stdout)");
  simulate->add_option("--noise-output", o.noise_output, "optional true-noise sidecar CSV");

  auto* estimate = app.add_subcommand("estimate", "estimate theta, sigma2, rho with intervals and Wald tests");
  estimate->add_option("--input", o.input, "lineage CSV")->required();
  estimate->add_option("--depth", o.depth, "generation n of the estimator (default: declared or deepest)");
  estimate->add_option("--level", o.level, "confidence level");
  estimate->add_option("--root-type", o.root_type, "type of the root cell (0 or 1)");
  estimate->add_option("--output", o.output, "JSON report path (default stdout)");

  auto* gw = app.add_subcommand("gw", "Galton-Watson diagnostics of an observation mask");
  gw->add_option("--input", o.input, "mask CSV (or lineage CSV)")->required();
  gw->add_option("--depth", o.depth, "depth of the mask");
  gw->add_option("--level", o.level, "confidence level for pi hat");
  gw->add_option("--root-type", o.root_type, "type of the root cell (0 or 1)");
  gw->add_option("--config", o.config, "optional configuration with the reproduction law");
  gw->add_option("--output", o.output, "JSON report path (default stdout)");

  auto* verify = app.add_subcommand("verify", "run a Monte Carlo check of the limit theorems");
  verify->add_option("--config", o.config, "experiment configuration JSON")->required();
  verify->add_option("--experiment", o.experiment, "experiment name (overrides the configuration)");
  verify->add_option("--depth", o.depth, "single depth (overrides the configuration)");
  verify->add_option("--seed", o.seed, "random seed (overrides the configuration)");
  verify->add_option("--root-type", o.root_type, "type of the root cell (0 or 1)");
  verify->add_option("--condition-on-survival", o.condition_on_survival, "true or false");
  auto* verify_level = verify->add_option("--level", o.level, "confidence level (overrides the configuration)");
  verify->add_option("--output", o.output, "JSON report path (default stdout)");
  verify->add_option("--rows-output", o.rows_output, "per-replicate CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg, info;
    const int code = app.exit(e, info, msg);
    out << info.str();
    err << msg.str();
    return code == 0 ? kExitOk : kExitValidation;
  }

  o.level_set = verify_level->count() > 0;
  try {
    if (o.root_type && *o.root_type != 0 && *o.root_type != 1) throw ValidationError("--root-type must be 0 or 1");
    if (!(o.level > 0.0 && o.level < 1.0)) throw ValidationError("--level must lie in (0, 1)");
    if (*simulate) return cmd_simulate(o, out, err);
    if (*estimate) return cmd_estimate(o, out, err);
    if (*gw) return cmd_gw(o, out, err);
    return cmd_verify(o, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegeneracyError& e) {
    err << "numerical degeneracy: " << e.what() << "\n";
    return kExitDegenerate;
  }
}

}  // namespace bartree
