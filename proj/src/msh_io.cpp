#include "thermocal/msh_io.hpp"

#include <map>
#include <sstream>
#include <string>

#include "thermocal/errors.hpp"
#include "thermocal/io_util.hpp"

namespace thermocal {

namespace {

struct LineReader {
  std::istringstream in;
  int line_no = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  // Next non-empty line, trimmed of trailing CR.
  std::string next(const char* expect_context) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw IoError(std::string("msh: unexpected end of file while reading ") + expect_context);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("msh: line " + std::to_string(line_no) + ": " + what);
  }
};

}  // namespace

Mesh import_msh(const std::string& path) {
  const std::string text = read_file(path);
  LineReader r(text);

  if (r.next("$MeshFormat") != "$MeshFormat") r.fail("expected $MeshFormat");
  {
    std::istringstream fmt(r.next("format line"));
    std::string version;
    int file_type = -1, data_size = -1;
    fmt >> version >> file_type >> data_size;
    if (version.rfind("2.2", 0) != 0 || file_type != 0)
      r.fail("unsupported format '" + version + "', expected ASCII 2.2");
  }
  if (r.next("$EndMeshFormat") != "$EndMeshFormat") r.fail("expected $EndMeshFormat");

  if (r.next("$Nodes") != "$Nodes") r.fail("expected $Nodes");
  int node_count = 0;
  {
    std::istringstream count(r.next("node count"));
    if (!(count >> node_count) || node_count < 0) r.fail("bad node count");
  }
  Mesh mesh;
  mesh.nodes.reserve(node_count);
  std::map<long long, int> node_index;  // file id -> dense index
  for (int k = 0; k < node_count; ++k) {
    std::istringstream ln(r.next("node line"));
    long long id;
    double x, y, z;
    if (!(ln >> id >> x >> y >> z)) r.fail("malformed node line");
    if (!node_index.emplace(id, static_cast<int>(mesh.nodes.size())).second)
      r.fail("duplicate node id " + std::to_string(id));
    mesh.nodes.emplace_back(x, y);
  }
  if (r.next("$EndNodes") != "$EndNodes") r.fail("expected $EndNodes");

  if (r.next("$Elements") != "$Elements") r.fail("expected $Elements");
  int elem_count = 0;
  {
    std::istringstream count(r.next("element count"));
    if (!(count >> elem_count) || elem_count < 0) r.fail("bad element count");
  }
  auto lookup = [&](long long id) {
    auto it = node_index.find(id);
    if (it == node_index.end()) r.fail("element references unknown node " + std::to_string(id));
    return it->second;
  };
  for (int k = 0; k < elem_count; ++k) {
    std::istringstream ln(r.next("element line"));
    long long id;
    int type = 0, ntags = 0;
    if (!(ln >> id >> type >> ntags) || ntags < 0) r.fail("malformed element line");
    int physical = 0;
    for (int t = 0; t < ntags; ++t) {
      int tag;
      if (!(ln >> tag)) r.fail("missing element tag");
      if (t == 0) physical = tag;
    }
    if (type == 1) {
      long long a, b;
      if (!(ln >> a >> b)) r.fail("line element needs 2 nodes");
      mesh.boundary_edges.push_back({{lookup(a), lookup(b)}, physical});
    } else if (type == 2) {
      long long a, b, c;
      if (!(ln >> a >> b >> c)) r.fail("triangle element needs 3 nodes");
      mesh.triangles.push_back({{lookup(a), lookup(b), lookup(c)}, physical});
    } else {
      r.fail("unsupported element type " + std::to_string(type) +
             " (only 2-node lines and 3-node triangles)");
    }
  }
  if (r.next("$EndElements") != "$EndElements") r.fail("expected $EndElements");

  // Normalize orientation to counter-clockwise.
  for (int t = 0; t < mesh.triangle_count(); ++t)
    if (mesh.triangle_area(t) < 0.0) std::swap(mesh.triangles[t].v[1], mesh.triangles[t].v[2]);

  mesh.validate();
  return mesh;
}

void export_msh(const Mesh& mesh, const std::string& path) {
  std::ostringstream out;
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out << "$Nodes\n" << mesh.nodes.size() << "\n";
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    out << (i + 1) << ' ' << format_g17(mesh.nodes[i].x()) << ' ' << format_g17(mesh.nodes[i].y())
        << " 0\n";
  out << "$EndNodes\n";
  out << "$Elements\n" << (mesh.boundary_edges.size() + mesh.triangles.size()) << "\n";
  long long id = 1;
  for (const BoundaryEdge& e : mesh.boundary_edges)
    out << id++ << " 1 2 " << e.tag << ' ' << e.tag << ' ' << (e.v[0] + 1) << ' ' << (e.v[1] + 1)
        << "\n";
  for (const Triangle& t : mesh.triangles)
    out << id++ << " 2 2 " << t.region << ' ' << t.region << ' ' << (t.v[0] + 1) << ' '
        << (t.v[1] + 1) << ' ' << (t.v[2] + 1) << "\n";
  out << "$EndElements\n";
  write_file_atomic(path, out.str());
}

}  // namespace thermocal
