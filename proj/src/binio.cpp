#include "dacl/binio.hpp"

#include <bit>
#include <istream>
#include <ostream>

#include "dacl/errors.hpp"

namespace dacl::io {

namespace {

void put_bytes(std::ostream& os, std::uint64_t v, int nbytes) {
    char buf[8];
    for (int i = 0; i < nbytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, nbytes);
}

std::uint64_t get_bytes(std::istream& is, int nbytes) {
    char buf[8];
    is.read(buf, nbytes);
    if (is.gcount() != nbytes) throw ContractError("binary read: unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < nbytes; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    }
    return v;
}

}  // namespace

void write_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, v, 1); }
void write_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, v, 4); }
void write_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, v, 8); }
void write_f64(std::ostream& os, double v) { put_bytes(os, std::bit_cast<std::uint64_t>(v), 8); }
void write_magic(std::ostream& os, const std::string& magic) {
    os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

std::uint8_t read_u8(std::istream& is) { return static_cast<std::uint8_t>(get_bytes(is, 1)); }
std::uint32_t read_u32(std::istream& is) { return static_cast<std::uint32_t>(get_bytes(is, 4)); }
std::uint64_t read_u64(std::istream& is) { return get_bytes(is, 8); }
double read_f64(std::istream& is) { return std::bit_cast<double>(get_bytes(is, 8)); }

void expect_magic(std::istream& is, const std::string& magic) {
    std::string got(magic.size(), '\0');
    is.read(got.data(), static_cast<std::streamsize>(magic.size()));
    if (is.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
        throw ContractError("binary read: expected magic \"" + magic + "\"");
    }
}

}  // namespace dacl::io
