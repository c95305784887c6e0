#pragma once

#include "thermocal/mesh.hpp"

namespace thermocal {

// Region and boundary tags emitted by the rectangle meshers.
namespace rect {
constexpr int kBackground = 1;
constexpr int kDisk = 2;
constexpr int kAnnulus = 3;
constexpr int kLeft = 1;
constexpr int kRight = 2;
constexpr int kBottom = 3;
constexpr int kTop = 4;
}  // namespace rect

// Region and boundary tags emitted by the machine-quadrant mesher.
namespace machine {
constexpr int kShaft = 1;
constexpr int kRotorIron = 2;
constexpr int kAirGap = 3;
constexpr int kStatorIron = 4;
constexpr int kInsulation = 5;
constexpr int kCopperLower = 6;
constexpr int kCopperUpper = 7;
constexpr int kJacket = 1;   // outer arc
constexpr int kCutX = 2;     // symmetry cut along the x axis
constexpr int kCutY = 3;     // symmetry cut along the y axis
constexpr int kBore = 4;     // inner arc (shaft bore)
}  // namespace machine

/// Rectangle with an embedded disk region (tag 2) in a background region (tag 1).
/// `resolution` is the element count across the width; sides are tagged
/// left/right/bottom/top so boundary conditions can be attached per side.
Mesh build_example1(double width, double height, const Eigen::Vector2d& disk_center,
                    double disk_radius, int resolution);

/// Same rectangle with a concentric annulus layer (tag 3) around the disk.
Mesh build_example2(double width, double height, const Eigen::Vector2d& disk_center,
                    double disk_radius, double annulus_outer_radius, int resolution);

/// Parametric quarter cross-section of a radial-flux machine.
/// Each radius names the zone that begins there; `shaft` is the inner mesh
/// boundary (shaft bore) and `jacket` the outer boundary arc, so the meshed
/// domain is the quarter annulus between them.
struct MachineQuadrantSpec {
  double shaft_radius = 8e-3;
  double rotor_yoke_radius = 24e-3;
  double air_gap_radius = 47.5e-3;
  double stator_bore_radius = 48e-3;
  double stator_yoke_radius = 66e-3;
  double jacket_radius = 80e-3;
  int slot_count = 9;             // per quadrant
  double slot_fill = 0.45;        // slot angular width as a fraction of the slot pitch
  double liner_thickness = 8e-4;  // insulation liner and layer separation [m]
  int radial_resolution = 48;     // ring count hint across [shaft, jacket]
  int angular_per_slot = 12;      // angular cells per slot pitch
};

/// Regions: shaft, rotor iron, air gap, stator iron (teeth + yoke), slot insulation,
/// copper lower layer, copper upper layer. Slots are angular wedges with an
/// insulation liner on all walls and a radial separator between the two layers.
Mesh build_machine_quadrant(const MachineQuadrantSpec& spec);

}  // namespace thermocal
