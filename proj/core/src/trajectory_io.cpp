#include "nsqp/trajectory_io.hpp"

#include <cstdio>
#include <ostream>

#include "nsqp/error.hpp"
#include "nsqp/field_io.hpp"
#include "nsqp/operators.hpp"

namespace nsqp {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const PathGrid& path) {
    out << "t,h_norm,v_norm\n";
    for (std::size_t n = 0; n < path.size(); ++n) {
        const auto nm = norms(path[n], 1.0);
        out << format_double(path.time(n)) << ',' << format_double(nm.h) << ',' << format_double(nm.v) << '\n';
    }
}

std::vector<std::filesystem::path> write_snapshots(const std::filesystem::path& dir, const PathGrid& path,
                                                   std::size_t stride, const std::string& prefix) {
    if (stride == 0) throw ValidationError("snapshot stride must be positive");
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (std::size_t n = 0; n < path.size(); ++n) {
        if (n % stride != 0 && n + 1 != path.size()) continue;
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%06zu.bin", prefix.c_str(), n);
        written.push_back(dir / name);
        save_field(written.back(), path[n]);
    }
    return written;
}

}  // namespace nsqp
