#pragma once

#include <string>

#include "thermocal/mesh.hpp"

namespace thermocal {

/// Read a mesh from the MSH 2.2 ASCII subset: $MeshFormat/$Nodes/$Elements,
/// element type 1 (boundary line, tag = first physical tag) and type 2
/// (triangle, region = first physical tag). Any other element type is rejected.
/// Triangle orientation is normalized to counter-clockwise.
Mesh import_msh(const std::string& path);

/// Write the same subset, byte-deterministically ("%.17g" coordinates,
/// lines before triangles, 1-based sequential ids).
void export_msh(const Mesh& mesh, const std::string& path);

}  // namespace thermocal
