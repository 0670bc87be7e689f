#pragma once

#include <string>
#include <vector>

#include "fracpm/mesh.hpp"
#include "fracpm/sparse.hpp"
#include "fracpm/stepper.hpp"

namespace fracpm {

/// Appends diagnostics rows under the fixed header
/// t,mass,min,max,entropy,l1_dist,fp_iters with 17 significant digits and
/// LF line endings.
class DiagnosticsCsvWriter {
public:
    explicit DiagnosticsCsvWriter(const std::string& path);
    void writeRow(const Diagnostics& d);
    void flush();

private:
    std::string path_;
    std::string buffer_;
};

struct DiagnosticsRow {
    Diagnostics d;
};

std::vector<Diagnostics> readDiagnosticsCsv(const std::string& path);

/// CSV rows x,y,value in vertex order.
void writeSnapshotCsv(const Mesh& mesh, const NodalField& field, const std::string& path);

/// Legacy ASCII VTK unstructured grid: POINTS, CELLS as triangles,
/// POINT_DATA scalar named after field_name.
void writeSnapshotVtk(const Mesh& mesh, const NodalField& field, const std::string& path,
                      const std::string& field_name = "rho");

/// x,value CSV along the mesh line closest to the requested y.
void writeSliceCsv(const Mesh& mesh, const NodalField& field, double y,
                   const std::string& path);

std::string formatFull(double v);  // shortest representation at 17 significant digits

}  // namespace fracpm
