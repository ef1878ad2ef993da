#include "fraudkit/textutil.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fraudkit/errors.hpp"

namespace fraudkit {

std::string format_sig6(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    double mag = std::floor(std::log10(std::fabs(x)));
    double scale = std::pow(10.0, digits - 1 - mag);
    return std::round(x * scale) / scale;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write file: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw UsageError("failed writing file: " + path);
}

}  // namespace fraudkit
