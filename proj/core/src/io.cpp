#include "infground/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "infground/error.hpp"

namespace infground {

namespace {

template <class Value>
std::string node_csv(const char* header, const GridDomain& grid, Value value) {
  std::string out = header;
  out += '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.inside(k)) continue;
    const Point p = grid.node(k);
    out += format_number(p.x);
    out += ',';
    out += format_number(p.y);
    out += ',';
    out += value(k);
    out += '\n';
  }
  return out;
}

void check_size(std::size_t n, const GridDomain& grid, const char* what) {
  if (n != grid.size()) throw InvalidParameter(std::string(what) + " is not aligned with the grid");
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string field_csv(const ScalarField& field, const GridDomain& grid) {
  if (field.nx() != grid.nx() || field.ny() != grid.ny()) {
    throw InvalidParameter("field is not aligned with the grid");
  }
  return node_csv("x,y,u", grid, [&](std::size_t k) { return format_number(field[k]); });
}

std::string distance_csv(const GridDomain& grid) {
  return node_csv("x,y,d", grid, [&](std::size_t k) { return format_number(grid.dist()[k]); });
}

std::string branch_csv(const std::vector<Branch>& branches, const GridDomain& grid) {
  check_size(branches.size(), grid, "branch map");
  return node_csv("x,y,branch", grid,
                  [&](std::size_t k) { return std::to_string(static_cast<int>(branches[k])); });
}

std::string branch_csv(const std::vector<std::uint8_t>& branches, const GridDomain& grid) {
  check_size(branches.size(), grid, "branch map");
  return node_csv("x,y,branch", grid, [&](std::size_t k) { return std::to_string(branches[k]); });
}

std::string trace_csv(const ContinuationTrace& trace) {
  std::string out = "parameter,lambda,residual,probe_left,probe_right,iterations,wall_time\n";
  for (const TraceStep& s : trace.steps) {
    out += format_number(s.parameter) + ',' + format_number(s.lambda) + ',' + format_number(s.residual) + ',' +
           format_number(s.probe_left) + ',' + format_number(s.probe_right) + ',' +
           std::to_string(s.iterations) + ',' + format_number(s.wall_time) + '\n';
  }
  return out;
}

std::string eigen_summary_json(const EigenResult& result, const GridDomain& grid, const Probes& probes) {
  const ScalarField u = max_normalized(result.field);
  nlohmann::ordered_json j;
  j["p"] = result.p;
  j["lambda"] = result.lambda;
  j["iterations"] = result.iterations;
  j["residual"] = result.residual;
  j["probes"] = {{"left", probe_value(u, grid, probes.left)}, {"right", probe_value(u, grid, probes.right)}};
  return j.dump(2) + '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void export_field(const ScalarField& field, const GridDomain& grid, const std::filesystem::path& path) {
  write_text(path, field_csv(field, grid));
}

}  // namespace infground
