#include "dmest/csv_io.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dmest {

namespace {

using Json = nlohmann::json;

const std::vector<std::string> kLeading{"spec_hash", "grid", "axis_value", "n", "m", "rank", "sigma", "rep", "seed",
                                        "epsilon"};
const std::vector<std::string> kTrailing{"iterations", "stationarity_residual", "tol_stat", "converged",
                                         "stop_reason", "objective_monotone", "wall_time"};

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(fmt::format("not a number: '{}'", s));
  return v;
}

}  // namespace

std::vector<std::string> result_columns(const std::vector<std::string>& metric_names) {
  std::vector<std::string> cols = kLeading;
  cols.insert(cols.end(), metric_names.begin(), metric_names.end());
  cols.insert(cols.end(), kTrailing.begin(), kTrailing.end());
  return cols;
}

std::string results_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& metric_names) {
  std::string out = fmt::format("{}\n", fmt::join(result_columns(metric_names), ","));
  for (const auto& r : rows) {
    if (r.metric_names != metric_names)
      throw std::invalid_argument(fmt::format("row metrics [{}] differ from the header metrics [{}]",
                                              fmt::join(r.metric_names, ","), fmt::join(metric_names, ",")));
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}", r.spec_hash, r.grid, num(r.axis_value), r.n, r.m, r.rank,
                       num(r.sigma), r.rep, r.seed, num(r.epsilon));
    for (double v : r.metric_values) out += "," + num(v);
    out += fmt::format(",{},{},{},{},{},{},{}\n", r.iterations, num(r.stationarity_residual), num(r.tol_stat),
                       r.converged ? 1 : 0, r.stop_reason, r.objective_monotone ? 1 : 0, num(r.wall_time));
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::vector<std::string>& metric_names,
              const std::string& path) {
  write_text(path, results_csv(rows, metric_names));
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw std::invalid_argument("results CSV has no header");
  const auto header = split(lines.front());
  const std::size_t lead = kLeading.size(), trail = kTrailing.size();
  if (header.size() < lead + trail || !std::equal(kLeading.begin(), kLeading.end(), header.begin()) ||
      !std::equal(kTrailing.begin(), kTrailing.end(), header.end() - static_cast<long>(trail)))
    throw std::invalid_argument("results CSV header does not match the expected columns");
  const std::vector<std::string> metrics(header.begin() + static_cast<long>(lead),
                                         header.end() - static_cast<long>(trail));
  std::vector<ResultRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li]);
    if (f.size() != header.size())
      throw std::invalid_argument(fmt::format("results CSV line {} has {} fields, expected {}", li + 1, f.size(),
                                              header.size()));
    ResultRow r;
    r.spec_hash = f[0];
    r.grid = std::stoi(f[1]);
    r.axis_value = parse_double(f[2]);
    r.n = std::stoll(f[3]);
    r.m = std::stoll(f[4]);
    r.rank = std::stoll(f[5]);
    r.sigma = parse_double(f[6]);
    r.rep = std::stoi(f[7]);
    r.seed = std::stoull(f[8]);
    r.epsilon = parse_double(f[9]);
    r.metric_names = metrics;
    for (std::size_t k = 0; k < metrics.size(); ++k) r.metric_values.push_back(parse_double(f[lead + k]));
    const std::size_t b = lead + metrics.size();
    r.iterations = std::stoi(f[b]);
    r.stationarity_residual = parse_double(f[b + 1]);
    r.tol_stat = parse_double(f[b + 2]);
    r.converged = f[b + 3] == "1";
    r.stop_reason = f[b + 4];
    r.objective_monotone = f[b + 5] == "1";
    r.wall_time = parse_double(f[b + 6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::string& path) { return parse_results_csv(read_text(path)); }

std::string drop_columns(const std::string& csv_text, const std::vector<std::string>& columns) {
  const auto lines = lines_of(csv_text);
  if (lines.empty()) return {};
  const auto header = split(lines.front());
  std::vector<bool> keep(header.size(), true);
  for (std::size_t i = 0; i < header.size(); ++i)
    keep[i] = std::find(columns.begin(), columns.end(), header[i]) == columns.end();
  std::string out;
  for (const auto& line : lines) {
    const auto f = split(line);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (i >= keep.size() || keep[i]) kept.push_back(f[i]);
    out += fmt::format("{}\n", fmt::join(kept, ","));
  }
  return out;
}

std::string plotdata_csv(const SweepReport& report) {
  std::string out = fmt::format("{},median,q25,q75,failures\n", sweep_axis_name(report.axis));
  for (const auto& p : report.points)
    out += fmt::format("{},{},{},{},{}\n", num(p.x), num(p.median), num(p.q25), num(p.q75), p.failures);
  return out;
}

void emit_plotdata(const SweepReport& report, const std::string& path) { write_text(path, plotdata_csv(report)); }

std::string bernstein_csv(const BernsteinTable& table) {
  std::string out = "t,empirical,bound,slack,violation\n";
  for (const auto& r : table.rows)
    out += fmt::format("{},{},{},{},{}\n", num(r.t), num(r.empirical), num(r.bound), num(r.slack), r.violation ? 1 : 0);
  return out;
}

std::string population_csv(const PopulationTable& table) {
  std::string out =
      "epsilon,l2_sq,sym_kl,slow_rhs,aligned_lhs,aligned_rhs,lowrank_ratio,gibbs_ratio,residual,tol_stat,converged\n";
  for (const auto& r : table.rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", num(r.epsilon), num(r.l2_sq), num(r.sym_kl),
                       num(r.slow_rhs), num(r.aligned_lhs), num(r.aligned_rhs), num(r.lowrank_ratio),
                       num(r.gibbs_ratio), num(r.residual), num(r.tol_stat), r.converged ? 1 : 0);
  return out;
}

void write_dataset(const Dataset& data, const std::string& path) {
  data.validate();
  const Index m = data.dim();
  std::string out = "j,design_index,y";
  for (Index k = 0; k < m * m; ++k) out += fmt::format(",x{}", k);
  out += "\n";
  for (Index j = 0; j < data.size(); ++j) {
    const Index idx = data.design_indices.empty() ? -1 : data.design_indices[static_cast<std::size_t>(j)];
    out += fmt::format("{},{},{}", j, idx, num(data.responses[static_cast<std::size_t>(j)]));
    const RVector c = hermitian_coordinates(data.designs[static_cast<std::size_t>(j)]);
    for (Index k = 0; k < c.size(); ++k) out += "," + num(c[k]);
    out += "\n";
  }
  write_text(path, out);

  Json meta{{"design", data.meta.design},         {"dim", data.meta.dim},
            {"noise", data.meta.noise},           {"design_seed", data.meta.design_seed},
            {"noise_seed", data.meta.noise_seed}, {"state_id", data.meta.state_id},
            {"n", data.size()}};
  write_text(path + ".json", meta.dump(2) + "\n");
}

Dataset read_dataset(const std::string& path) {
  const auto lines = lines_of(read_text(path));
  if (lines.empty()) throw std::runtime_error(fmt::format("{}: empty dataset file", path));
  const auto header = split(lines.front());
  const Index coords = static_cast<Index>(header.size()) - 3;
  const auto m = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(coords))));
  if (coords < 1 || m * m != coords || header[0] != "j" || header[1] != "design_index" || header[2] != "y")
    throw std::runtime_error(fmt::format("{}: header is not 'j,design_index,y,x0..x(m^2-1)'", path));

  Dataset data;
  bool all_indexed = true;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li]);
    if (static_cast<Index>(f.size()) != coords + 3)
      throw std::runtime_error(fmt::format("{}: line {} has {} fields, expected {}", path, li + 1, f.size(), coords + 3));
    data.responses.push_back(parse_double(f[2]));
    const Index idx = std::stoll(f[1]);
    all_indexed = all_indexed && idx >= 0;
    data.design_indices.push_back(idx);
    RVector c(coords);
    for (Index k = 0; k < coords; ++k) c[k] = parse_double(f[static_cast<std::size_t>(k + 3)]);
    data.designs.push_back(from_hermitian_coordinates(c, m));
  }
  if (!all_indexed) data.design_indices.clear();
  data.meta.dim = m;

  std::ifstream sidecar(path + ".json");
  if (sidecar) {
    const Json meta = Json::parse(sidecar);
    data.meta.design = meta.value("design", "");
    data.meta.noise = meta.value("noise", "");
    data.meta.design_seed = meta.value("design_seed", std::uint64_t{0});
    data.meta.noise_seed = meta.value("noise_seed", std::uint64_t{0});
    data.meta.state_id = meta.value("state_id", "");
  }
  data.validate();
  return data;
}

void write_estimate(const EstimateResult& result, double epsilon, const std::string& path) {
  const CMatrix& a = result.estimate.matrix().mat();
  std::string out = "i,j,re,im\n";
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out += fmt::format("{},{},{},{}\n", i, j, num(a(i, j).real()), num(a(i, j).imag()));
  write_text(path, out);

  Json meta{{"epsilon", epsilon},
            {"objective", result.objective_trace.empty() ? 0.0 : result.objective_trace.back()},
            {"iterations", result.iterations},
            {"stationarity_residual", result.stationarity_residual},
            {"tol_stat", result.tol_stat},
            {"converged", result.converged},
            {"stop_reason", result.stop_reason}};
  write_text(path + ".json", meta.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing: {}", path, std::strerror(errno)));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("{}: write failed", path));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("{}: cannot open for reading: {}", path, std::strerror(errno)));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dmest
