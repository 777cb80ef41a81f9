#include "curlvar/export.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "json.hpp"

#include "curlvar/errors.hpp"
#include "curlvar/operators.hpp"

namespace curlvar {

namespace {

static_assert(std::endian::native == std::endian::little, "raw export assumes a little-endian host");

std::filesystem::path with_suffix(std::filesystem::path stem, const char* suffix) {
  stem += suffix;
  return stem;
}

Location location_from(const std::string& s) {
  for (Location loc : {Location::node, Location::edge, Location::face, Location::cell})
    if (to_string(loc) == s) return loc;
  throw InvalidField("unknown field location '" + s + "'");
}

}  // namespace

void write_vtk(const std::filesystem::path& path, const VectorField& u, const std::string& name) {
  const VectorField c = u.location() == Location::cell ? u : to_cells(u);
  const GridSpec& g = u.grid();
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "# vtk DataFile Version 3.0\n" << name << " (" << to_string(u.location()) << " field at cell centers)\n";
  out << "ASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << g.cells[0] + 1 << ' ' << g.cells[1] + 1 << ' ' << g.cells[2] + 1 << '\n';
  out << std::setprecision(17);
  out << "ORIGIN " << g.origin[0] << ' ' << g.origin[1] << ' ' << g.origin[2] << '\n';
  out << "SPACING " << g.spacing(0) << ' ' << g.spacing(1) << ' ' << g.spacing(2) << '\n';
  out << "CELL_DATA " << static_cast<long long>(g.cells[0]) * g.cells[1] * g.cells[2] << '\n';
  out << "VECTORS " << name << " double\n";
  // VTK orders points with x fastest.
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i)
        out << c[0](i, j, k) << ' ' << c[1](i, j, k) << ' ' << c[2](i, j, k) << '\n';
  if (!out) throw Error("write to " + path.string() + " failed");
}

void write_raw(const std::filesystem::path& stem, const VectorField& u) {
  const GridSpec& g = u.grid();
  nlohmann::json header;
  header["dims"] = g.cells;
  header["spacing"] = {g.spacing(0), g.spacing(1), g.spacing(2)};
  header["origin"] = g.origin;
  header["lengths"] = g.lengths;
  header["location"] = to_string(u.location());
  header["dtype"] = "float64";
  header["endianness"] = "little";
  header["order"] = "row-major, last index fastest";
  std::ofstream blob(with_suffix(stem, ".bin"), std::ios::binary);
  if (!blob) throw Error("cannot open " + with_suffix(stem, ".bin").string() + " for writing");
  std::size_t offset = 0;
  for (int c = 0; c < 3; ++c) {
    const Array3& a = u[c];
    const auto data = a.span();
    blob.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    header["components"].push_back({{"axis", c}, {"dims", a.dims()}, {"offset_bytes", offset}, {"count", data.size()}});
    offset += data.size() * sizeof(double);
  }
  if (!blob) throw Error("write to " + with_suffix(stem, ".bin").string() + " failed");
  std::ofstream side(with_suffix(stem, ".json"));
  side << header.dump(2) << '\n';
  if (!side) throw Error("write to " + with_suffix(stem, ".json").string() + " failed");
}

VectorField read_raw(const std::filesystem::path& stem) {
  std::ifstream side(with_suffix(stem, ".json"));
  if (!side) throw Error("cannot open " + with_suffix(stem, ".json").string());
  const nlohmann::json header = nlohmann::json::parse(side);
  if (header.at("dtype") != "float64" || header.at("endianness") != "little")
    throw InvalidField("unsupported raw layout");
  GridSpec g;
  g.cells = header.at("dims").get<std::array<int, 3>>();
  g.lengths = header.at("lengths").get<std::array<double, 3>>();
  g.origin = header.at("origin").get<std::array<double, 3>>();
  g.validate();
  VectorField u(g, location_from(header.at("location").get<std::string>()));
  std::ifstream blob(with_suffix(stem, ".bin"), std::ios::binary);
  if (!blob) throw Error("cannot open " + with_suffix(stem, ".bin").string());
  for (const auto& comp : header.at("components")) {
    const int c = comp.at("axis").get<int>();
    auto data = u[c].span();
    if (comp.at("count").get<std::size_t>() != data.size() ||
        comp.at("dims").get<std::array<int, 3>>() != u[c].dims())
      throw InvalidField("raw component does not match the grid");
    blob.seekg(static_cast<std::streamoff>(comp.at("offset_bytes").get<std::size_t>()));
    blob.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!blob) throw InvalidField("raw blob is truncated");
  }
  return u;
}

}  // namespace curlvar
