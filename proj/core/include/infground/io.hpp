#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "infground/grid.hpp"
#include "infground/inf.hpp"
#include "infground/plap.hpp"
#include "infground/trace.hpp"

namespace infground {

// CSV writers emit one row per inside node in node-index order, i.e. by y and
// then x ascending, with every number printed to 17 significant digits.

/// Header `x,y,u`.
std::string field_csv(const ScalarField& field, const GridDomain& grid);
/// Header `x,y,d`, the grid distance field.
std::string distance_csv(const GridDomain& grid);
/// Header `x,y,branch` with 0 outside, 1 pinned, 2 harmonic, 3 gradient.
std::string branch_csv(const std::vector<Branch>& branches, const GridDomain& grid);
std::string branch_csv(const std::vector<std::uint8_t>& branches, const GridDomain& grid);
/// Header `parameter,lambda,residual,probe_left,probe_right,iterations,wall_time`.
std::string trace_csv(const ContinuationTrace& trace);

/// `{"p","lambda","iterations","residual","probes":{"left","right"}}`, probes
/// on the max-normalized field.
std::string eigen_summary_json(const EigenResult& result, const GridDomain& grid, const Probes& probes);

/// Decimal text with 17 significant digits (printf %.17g).
std::string format_number(double value);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

void export_field(const ScalarField& field, const GridDomain& grid, const std::filesystem::path& path);

}  // namespace infground
