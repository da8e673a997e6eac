#include "nsqp/field_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "nsqp/error.hpp"

namespace nsqp {

static_assert(std::endian::native == std::endian::little, "field I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic{'N', 'S', 'Q', 'P', 'F', 'L', 'D', '\0'};

template <class T>
void put(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), bytes.size())) throw ValidationError("truncated field file");
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

GridPtr resolve_grid(GridPtr grid, double length, int n) {
    if (!grid) return make_grid(length, n);
    if (grid->length() != length || grid->modes() != n) {
        throw ValidationError("field file (L=" + std::to_string(length) + ", N=" + std::to_string(n) +
                              ") does not match the target grid");
    }
    return grid;
}

}  // namespace

void write_field_binary(std::ostream& out, const FourierField& u) {
    const auto& g = u.grid();
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kFieldFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.modes()));
    put<double>(out, g.length());
    for (std::size_t i = 0; i < g.size(); ++i) {
        put<double>(out, u.x(i).real());
        put<double>(out, u.x(i).imag());
        put<double>(out, u.y(i).real());
        put<double>(out, u.y(i).imag());
    }
    if (!out) throw std::runtime_error("failed writing field");
}

FourierField read_field_binary(std::istream& in, GridPtr grid) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ValidationError("not an nsqp field file");
    const auto version = get<std::uint32_t>(in);
    if (version != kFieldFormatVersion) {
        throw ValidationError("unsupported field format version " + std::to_string(version));
    }
    const auto n = static_cast<int>(get<std::uint32_t>(in));
    const auto length = get<double>(in);
    FourierField u(resolve_grid(std::move(grid), length, n));
    for (std::size_t i = 0; i < u.modes(); ++i) {
        const double a = get<double>(in), b = get<double>(in), c = get<double>(in), d = get<double>(in);
        u.x(i) = {a, b};
        u.y(i) = {c, d};
    }
    return u;
}

std::string field_to_json(const FourierField& u) {
    const auto& g = u.grid();
    nlohmann::json j;
    j["format"] = "nsqp-field";
    j["version"] = kFieldFormatVersion;
    j["L"] = g.length();
    j["N"] = g.modes();
    std::vector<double> coeffs;
    coeffs.reserve(4 * g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        coeffs.insert(coeffs.end(), {u.x(i).real(), u.x(i).imag(), u.y(i).real(), u.y(i).imag()});
    }
    j["coefficients"] = std::move(coeffs);
    return j.dump();
}

FourierField field_from_json(const std::string& text, GridPtr grid) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("field JSON: ") + e.what());
    }
    if (j.value("format", "") != "nsqp-field") throw ValidationError("field JSON: wrong format tag");
    if (j.value("version", 0u) != kFieldFormatVersion) throw ValidationError("field JSON: unsupported version");
    const double length = j.at("L").get<double>();
    const int n = j.at("N").get<int>();
    FourierField u(resolve_grid(std::move(grid), length, n));
    const auto coeffs = j.at("coefficients").get<std::vector<double>>();
    if (coeffs.size() != 4 * u.modes()) throw ValidationError("field JSON: wrong coefficient count");
    for (std::size_t i = 0; i < u.modes(); ++i) {
        u.x(i) = {coeffs[4 * i], coeffs[4 * i + 1]};
        u.y(i) = {coeffs[4 * i + 2], coeffs[4 * i + 3]};
    }
    return u;
}

void save_field(const std::filesystem::path& path, const FourierField& u) {
    if (path.extension() == ".json") {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        out << field_to_json(u) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_field_binary(out, u);
}

FourierField load_field(const std::filesystem::path& path, GridPtr grid) {
    if (path.extension() == ".json") {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return field_from_json(ss.str(), std::move(grid));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_field_binary(in, std::move(grid));
}

}  // namespace nsqp
