#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dacl::io {

// Little-endian primitives for the flat binary file formats. Explicit byte
// packing so files are identical regardless of host endianness.
void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
void write_magic(std::ostream& os, const std::string& magic);

std::uint8_t read_u8(std::istream& is);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
void expect_magic(std::istream& is, const std::string& magic);  // throws on mismatch

}  // namespace dacl::io
