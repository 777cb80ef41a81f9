#pragma once

#include <filesystem>
#include <string>

#include "curlvar/field.hpp"

namespace curlvar {

// Legacy VTK structured-points file (ASCII) with the field averaged to cell
// centers (to_cells) as CELL_DATA vectors named `name`.
void write_vtk(const std::filesystem::path& path, const VectorField& u, const std::string& name = "u");

// Raw little-endian float64 samples of the three staggered components, each
// in its own dims with the last index fastest, written to `stem`.bin, plus a
// JSON header `stem`.json {dims, spacing, origin, lengths, location,
// components: [{axis, dims, offset_bytes, count}], dtype, endianness, order}.
void write_raw(const std::filesystem::path& stem, const VectorField& u);

// Inverse of write_raw (reads the header next to the blob).
VectorField read_raw(const std::filesystem::path& stem);

}  // namespace curlvar
