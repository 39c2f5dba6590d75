#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bartree/bar_process.hpp"
#include "bartree/estimation.hpp"
#include "bartree/experiments.hpp"
#include "bartree/inference.hpp"

namespace bartree {

/// Lineage CSV: one `k,x` record per line, `#` comments, and optional
/// `# depth=N` / `# root_type=i` header directives.
struct LineageFile {
  ObservedTree tree;
  std::optional<Generation> declared_depth;
  std::size_t records = 0;
};

/// Parses lineage text; `source` names the input in error messages.
/// `depth` overrides the declared depth and must cover every record.
LineageFile parse_lineage_text(const std::string& text, const std::string& source = "<input>",
                               std::optional<Generation> depth = std::nullopt);
LineageFile parse_lineage(const std::string& path, std::optional<Generation> depth = std::nullopt);

/// Writes the header directives and the records with 17 significant digits.
void write_lineage(std::ostream& os, const ObservedTree& tree);

/// Noise sidecar `k,eps` for every observed node of generation >= 1.
void write_noise(std::ostream& os, const ObservedTree& tree);

/// Mask CSV: one observed id per line (a lineage file is accepted too,
/// its first column is used).
ObservationMask parse_mask_text(const std::string& text, const std::string& source = "<input>",
                                std::optional<Generation> depth = std::nullopt, int root_type = 0);
void write_mask(std::ostream& os, const ObservationMask& mask);

/// Shortest decimal text of x that reads back to the same double.
std::string format_real(double x);

inline constexpr const char* kConfigSchema = "bartree.config/1";
inline constexpr const char* kReportSchema = "bartree.report/1";

/// Experiment configuration as read from JSON.
struct RunConfig {
  std::optional<Experiment> experiment;
  McConfig mc;
};

RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
RunConfig parse_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg, int indent = 2);

std::string report_to_json(const McReport& report, int indent = 2);
void write_report_rows(std::ostream& os, const McReport& report);

/// Estimation report: coefficients with intervals, noise estimates, Wald tests and pi hat.
std::string estimate_report_json(const ObservedTree& tree, const ThetaEstimate& est, double level,
                                 const std::string& input, int indent = 2);

std::string read_text_file(const std::string& path);

}  // namespace bartree
