#include "fracpm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracpm {

std::string formatFull(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

DiagnosticsCsvWriter::DiagnosticsCsvWriter(const std::string& path) : path_(path) {
    buffer_ = "t,mass,min,max,entropy,l1_dist,fp_iters\n";
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("DiagnosticsCsvWriter: cannot open " + path_);
    out << buffer_;
    buffer_.clear();
}

void DiagnosticsCsvWriter::writeRow(const Diagnostics& d) {
    buffer_ += formatFull(d.t) + "," + formatFull(d.mass) + "," + formatFull(d.min_rho) +
               "," + formatFull(d.max_rho) + "," + formatFull(d.entropy) + "," +
               formatFull(d.l1_dist) + "," + std::to_string(d.fp_iters) + "\n";
    if (buffer_.size() > 1 << 16) flush();
}

void DiagnosticsCsvWriter::flush() {
    if (buffer_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("DiagnosticsCsvWriter: cannot append " + path_);
    out << buffer_;
    buffer_.clear();
}

std::vector<Diagnostics> readDiagnosticsCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("readDiagnosticsCsv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("readDiagnosticsCsv: empty file " + path);
    std::vector<Diagnostics> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Diagnostics d;
        char comma;
        if (!(ss >> d.t >> comma >> d.mass >> comma >> d.min_rho >> comma >> d.max_rho >>
              comma >> d.entropy >> comma >> d.l1_dist >> comma >> d.fp_iters))
            throw std::runtime_error("readDiagnosticsCsv: malformed row in " + path);
        rows.push_back(d);
    }
    return rows;
}

void writeSnapshotCsv(const Mesh& mesh, const NodalField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("writeSnapshotCsv: cannot open " + path);
    out << "x,y,value\n";
    for (std::size_t i = 0; i < mesh.vertexCount(); ++i) {
        const auto& v = mesh.vertex(i);
        out << formatFull(v[0]) << "," << formatFull(v[1]) << "," << formatFull(field[i])
            << "\n";
    }
    if (!out) throw std::runtime_error("writeSnapshotCsv: write failed for " + path);
}

void writeSnapshotVtk(const Mesh& mesh, const NodalField& field, const std::string& path,
                      const std::string& field_name) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("writeSnapshotVtk: cannot open " + path);
    out << "# vtk DataFile Version 3.0\n";
    out << "fracpm snapshot\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertexCount() << " double\n";
    for (std::size_t i = 0; i < mesh.vertexCount(); ++i) {
        const auto& v = mesh.vertex(i);
        out << formatFull(v[0]) << " " << formatFull(v[1]) << " 0\n";
    }
    const std::size_t nc = mesh.elementCount();
    out << "CELLS " << nc << " " << 4 * nc << "\n";
    for (std::size_t k = 0; k < nc; ++k) {
        const auto& t = mesh.triangle(k);
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    out << "CELL_TYPES " << nc << "\n";
    for (std::size_t k = 0; k < nc; ++k) out << "5\n";
    out << "POINT_DATA " << mesh.vertexCount() << "\n";
    out << "SCALARS " << field_name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < mesh.vertexCount(); ++i) out << formatFull(field[i]) << "\n";
    if (!out) throw std::runtime_error("writeSnapshotVtk: write failed for " + path);
}

void writeSliceCsv(const Mesh& mesh, const NodalField& field, double y,
                   const std::string& path) {
    // Structured rows: pick the vertex row whose y is closest to the request.
    const auto ext = mesh.extent();
    const int ny = mesh.cellsY();
    const double dy = (ext[3] - ext[2]) / ny;
    int row = static_cast<int>(std::lround((y - ext[2]) / dy));
    row = std::max(0, std::min(ny, row));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("writeSliceCsv: cannot open " + path);
    out << "x,value\n";
    const int nx = mesh.cellsX();
    for (int i = 0; i <= nx; ++i) {
        const std::size_t vi = static_cast<std::size_t>(row) * (nx + 1) + i;
        out << formatFull(mesh.vertex(vi)[0]) << "," << formatFull(field[vi]) << "\n";
    }
    if (!out) throw std::runtime_error("writeSliceCsv: write failed for " + path);
}

}  // namespace fracpm
