#pragma once

// CSV and JSON serialization of experiment rows, sweep summaries, datasets
// and estimates. Doubles are written with 17 significant digits so a
// round trip reproduces them exactly. I/O failures throw std::runtime_error
// carrying the path.

#include "dmest/estimator.hpp"
#include "dmest/harness.hpp"

#include <string>
#include <vector>

namespace dmest {

/// Column order: spec_hash, grid, axis_value, n, m, rank, sigma, rep, seed,
/// epsilon, <metrics...>, iterations, stationarity_residual, tol_stat,
/// converged, stop_reason, objective_monotone, wall_time.
std::vector<std::string> result_columns(const std::vector<std::string>& metric_names);
std::string results_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& metric_names);
void emit_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& metric_names,
              const std::string& path);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::vector<ResultRow> read_results_csv(const std::string& path);

/// CSV text with the named columns removed (used to compare runs without timing).
std::string drop_columns(const std::string& csv_text, const std::vector<std::string>& columns);

/// x, median, q25, q75, failures per sweep point.
std::string plotdata_csv(const SweepReport& report);
void emit_plotdata(const SweepReport& report, const std::string& path);

std::string bernstein_csv(const BernsteinTable& table);
std::string population_csv(const PopulationTable& table);

/// Dataset as CSV (j, design_index, y, then the m^2 hermitian_coordinates of X)
/// plus a JSON sidecar `path + ".json"` with the metadata.
void write_dataset(const Dataset& data, const std::string& path);
Dataset read_dataset(const std::string& path);

/// Estimate entries as CSV rows (i, j, re, im) plus a JSON sidecar with the
/// solver summary.
void write_estimate(const EstimateResult& result, double epsilon, const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace dmest
