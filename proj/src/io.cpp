#include "vortexshape/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace vortexshape {

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<VtkPointField>& fields) {
  os << "# vtk DataFile Version 3.0\n";
  os << "vortexshape snapshot\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os.precision(12);
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices) os << v.x << " " << v.y << " 0\n";
  os << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) os << "5\n";
  if (fields.empty()) return;
  os << "POINT_DATA " << mesh.num_vertices() << "\n";
  for (const VtkPointField& f : fields) {
    if (!f.field) continue;
    if (f.field->kind == Field::Kind::VectorQuadratic) {
      os << "VECTORS " << f.name << " double\n";
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        Vec2 val = f.field->node_value(v);
        os << val.x << " " << val.y << " 0\n";
      }
    } else {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int v = 0; v < mesh.num_vertices(); ++v) os << f.field->coeffs[v] << "\n";
    }
  }
}

void write_vtk_file(const std::string& path, const Mesh& mesh,
                    const std::vector<VtkPointField>& fields) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_vtk(os, mesh, fields);
}

void write_history_header(std::ostream& os) {
  os << "iteration,j1[energy],j2[energy],perimeter[length],volume[area],"
        "objective[energy],lagrangian[energy],step[1],retries[1],ell[1],b[1],"
        "min_angle[deg]\n";
}

void write_history_row(std::ostream& os, const IterationRecord& rec) {
  os << rec.iteration << "," << rec.breakdown.j1 << "," << rec.breakdown.j2 << ","
     << rec.breakdown.perimeter << "," << rec.breakdown.volume << ","
     << rec.breakdown.objective << "," << rec.breakdown.lagrangian << "," << rec.step << ","
     << rec.retries << "," << rec.ell << "," << rec.b << "," << rec.quality.min_angle_deg
     << "\n";
}

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.precision(12);
  write_history_header(os);
  for (const IterationRecord& rec : records) write_history_row(os, rec);
}

void write_polyline_csv(const std::string& path, const Polyline& polyline) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.precision(17);
  os << "x[length],y[length]\n";
  for (const Vec2& p : polyline) os << p.x << "," << p.y << "\n";
}

Polyline read_polyline_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  Polyline out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    double x, y;
    if (ss >> x >> y) out.push_back({x, y});
    // non-numeric rows (the header) are skipped
  }
  if (out.empty()) throw std::runtime_error("no points in polyline file " + path);
  return out;
}

void write_boundary_scalar_csv(const std::string& path, const DofMap& dofmap,
                               const BoundaryScalar& values) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.precision(17);
  os << "node[1],x[length],y[length],value[*]\n";
  for (std::size_t i = 0; i < values.nodes.size(); ++i) {
    Vec2 p = dofmap.node_position(values.nodes[i]);
    os << values.nodes[i] << "," << p.x << "," << p.y << "," << values.values[i] << "\n";
  }
}

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<double>& values) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  const int w = 640, h = 400, ml = 70, mr = 20, mt = 40, mb = 40;
  double lo = values.empty() ? 0.0 : values[0];
  double hi = lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) {
    hi += 1.0;
    lo -= 1.0;
  }
  auto X = [&](std::size_t i) {
    return ml + (w - ml - mr) * (values.size() > 1 ? double(i) / (values.size() - 1) : 0.5);
  };
  auto Y = [&](double v) { return h - mb - (h - mt - mb) * (v - lo) / (hi - lo); };

  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
     << "</text>\n";
  os << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
     << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
     << "' stroke='black'/>\n";
  os << std::setprecision(4);
  os << "<text x='" << ml - 6 << "' y='" << Y(hi) + 4 << "' text-anchor='end' font-size='11'>"
     << hi << "</text>\n";
  os << "<text x='" << ml - 6 << "' y='" << Y(lo) + 4 << "' text-anchor='end' font-size='11'>"
     << lo << "</text>\n";
  os << "<text x='" << w - mr << "' y='" << h - mb + 16
     << "' text-anchor='end' font-size='11'>iteration " << (values.empty() ? 0 : values.size() - 1)
     << "</text>\n";
  if (!values.empty()) {
    os << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < values.size(); ++i) os << X(i) << "," << Y(values[i]) << " ";
    os << "'/>\n";
  }
  os << "</svg>\n";
}

}  // namespace vortexshape
