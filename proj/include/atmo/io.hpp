#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "atmo/diagnostics.hpp"
#include "atmo/state.hpp"

namespace atmo {

/// Legacy ASCII VTK, STRUCTURED_POINTS at the cell centres: POINT_DATA
/// SCALARS C and p (the surface pressure broadcast over each column in
/// hydrostatic mode) and VECTORS velocity averaged from the faces.
void write_vtk(const SimState& s, const Grid& grid, const std::filesystem::path& path,
               const std::string& run_id);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Header row then one row per record; values printed with 17 significant
/// digits so that reading them back is exact.
void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

CsvTable to_table(const EnergyReport& report);
CsvTable to_table(const ConvergenceReport& report);
ConvergenceReport sweep_from_table(const CsvTable& table);

}  // namespace atmo
