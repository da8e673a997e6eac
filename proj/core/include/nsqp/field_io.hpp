#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nsqp/fourier_field.hpp"

namespace nsqp {

/// Version written by this build; readers reject other versions.
inline constexpr unsigned kFieldFormatVersion = 1;

/// Binary field layout (all little-endian):
///
///   offset  size  content
///   0       8     magic "NSQPFLD\0"
///   8       4     u32 format version
///   12      4     u32 N
///   16      8     f64 L
///   24      32*N*N  per mode in row-major order (iy outer, ix inner, FFT index order):
///                 f64 Re u_x, Im u_x, Re u_y, Im u_y
void write_field_binary(std::ostream& out, const FourierField& u);

/// Reads a binary field. When `grid` is given, L and N must match it; otherwise a default
/// (dealiased, untruncated) grid is built from the header.
FourierField read_field_binary(std::istream& in, GridPtr grid = nullptr);

/// JSON form: {"format":"nsqp-field","version":1,"L":..,"N":..,"coefficients":[...]} where
/// coefficients is the same flat sequence of 4*N*N reals as the binary payload.
std::string field_to_json(const FourierField& u);
FourierField field_from_json(const std::string& text, GridPtr grid = nullptr);

/// Chooses JSON for a ".json" extension and binary otherwise.
void save_field(const std::filesystem::path& path, const FourierField& u);
FourierField load_field(const std::filesystem::path& path, GridPtr grid = nullptr);

}  // namespace nsqp
