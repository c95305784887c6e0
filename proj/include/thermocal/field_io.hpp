#pragma once

#include <string>

#include "thermocal/problem.hpp"

namespace thermocal {

/// Legacy VTK ASCII UNSTRUCTURED_GRID with a POINT_DATA scalar "temperature_K".
/// Byte-deterministic for identical inputs.
void write_field_vtk(const TemperatureField& field, const std::string& path);

/// CSV rows `node_id,x,y,temperature_K`.
void write_field_csv(const TemperatureField& field, const std::string& path);

}  // namespace thermocal
