#pragma once

#include <filesystem>
#include <string>

#include "pssim/observables.hpp"
#include "pssim/scenarios.hpp"

namespace pssim::io {

// Sectioned key = value configuration text <-> Scenario. parse_config
// resolves an optional preset key first, then applies every other key as an
// override; unknown sections or keys fail with their line number.
// format_config writes the fully expanded scenario with lossless (17
// significant digit) numbers, so parse(format(sc)) == sc.
scenarios::Scenario parse_config(const std::string& text);
scenarios::Scenario load_config(const std::filesystem::path& path);
std::string format_config(const scenarios::Scenario& sc);

// Files a run leaves behind, named relative to the directory so they can
// reference each other portably.
struct OutputBundle {
  std::filesystem::path directory;
  std::string timeseries = "timeseries.csv";
  std::string summary = "summary.json";
  std::string plot = "plot.py";
  std::string reference;  // reference timeseries, empty when absent
};

// Delimiter-separated columns t, p0, p1, p2, p3, s01_abs, s12_abs, s02_abs,
// intensity with a header row, 12 significant digits.
void write_timeseries(const observables::RunResult& run, const std::filesystem::path& path);

// Reads the column file back; engine tag and parameter snapshot are not
// stored there and stay default. Metrics are NOT recomputed.
observables::RunResult read_timeseries(const std::filesystem::path& path);

// Parameter snapshot, metrics, and invariant-audit maxima of one run as a
// JSON object.
std::string summary_json(const observables::RunResult& run);

// Full summary document for a bundle: tool version, scenario, run block,
// optional reference block, and the file names of the other bundle members.
void write_summary(const scenarios::Scenario& sc, const scenarios::RunOutput& out,
                   const OutputBundle& bundle);

// Standalone matplotlib script rendering 2P solid, 1S dashed, annihilated
// fraction dotted, plus a thin independent-atom reference curve when the
// bundle has one, or a thin scaled emission-intensity curve for undriven
// runs without one.
void emit_plot_script(const scenarios::Scenario& sc, const OutputBundle& bundle);

// Writes timeseries, summary, plot script (and the reference timeseries if
// the run has a companion) into dir, creating it if needed.
OutputBundle write_bundle(const scenarios::Scenario& sc, const scenarios::RunOutput& out,
                          const std::filesystem::path& dir);

// Subcommands: run, sweep, validate, compare-oracle, list-presets.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace pssim::io
