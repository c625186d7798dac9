#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vortexshape/descent.hpp"

namespace vortexshape {

// Legacy ASCII VTK with vertex point data (quadratic fields are written at
// the mesh vertices).
struct VtkPointField {
  std::string name;
  const Field* field = nullptr;
};

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<VtkPointField>& fields);
void write_vtk_file(const std::string& path, const Mesh& mesh,
                    const std::vector<VtkPointField>& fields);

// Per-iteration telemetry CSV.
void write_history_header(std::ostream& os);
void write_history_row(std::ostream& os, const IterationRecord& rec);
void write_history_csv(const std::string& path, const std::vector<IterationRecord>& records);

// Closed polylines as "x,y" rows.
void write_polyline_csv(const std::string& path, const Polyline& polyline);
Polyline read_polyline_csv(const std::string& path);

// BoundaryScalar as "node,x,y,value" rows.
void write_boundary_scalar_csv(const std::string& path, const DofMap& dofmap,
                               const BoundaryScalar& values);

// Minimal SVG line chart of one series (used for the normalized trends).
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<double>& values);

}  // namespace vortexshape
