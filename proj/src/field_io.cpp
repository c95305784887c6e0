#include "thermocal/field_io.hpp"

#include <sstream>

#include "thermocal/errors.hpp"
#include "thermocal/io_util.hpp"

namespace thermocal {

void write_field_vtk(const TemperatureField& field, const std::string& path) {
  if (!field.mesh || field.u.size() != field.mesh->node_count())
    throw ConfigError("vtk export: field does not match its mesh");
  const Mesh& mesh = *field.mesh;

  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << "steady-state temperature field\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  for (const Eigen::Vector2d& p : mesh.nodes)
    out << format_shortest(p.x()) << ' ' << format_shortest(p.y()) << " 0\n";
  out << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << "\n";
  for (const Triangle& t : mesh.triangles)
    out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";  // VTK_TRIANGLE
  out << "POINT_DATA " << mesh.node_count() << "\n";
  out << "SCALARS temperature_K double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < field.u.size(); ++i) out << format_shortest(field.u[i]) << "\n";
  write_file_atomic(path, out.str());
}

void write_field_csv(const TemperatureField& field, const std::string& path) {
  if (!field.mesh || field.u.size() != field.mesh->node_count())
    throw ConfigError("csv export: field does not match its mesh");
  std::ostringstream out;
  out << "node_id,x,y,temperature_K\n";
  for (int i = 0; i < field.mesh->node_count(); ++i)
    out << i << ',' << format_shortest(field.mesh->nodes[i].x()) << ','
        << format_shortest(field.mesh->nodes[i].y()) << ',' << format_shortest(field.u[i]) << "\n";
  write_file_atomic(path, out.str());
}

}  // namespace thermocal
