#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "risp/signal.hpp"

namespace risp {

class GraymapError : public std::runtime_error {
public:
    explicit GraymapError(const std::string& what) : std::runtime_error(what) {}
};

/// Writes a binary portable graymap (P5, maxval 65535, big-endian samples).
/// Values are clamped to [0,1]; out-of-range inputs log one warning.
inline void write_graymap(const Signal& x, const std::string& path) {
    require_shape(x, "write_graymap");
    bool clipped = false;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GraymapError("write_graymap: cannot open " + path);
    out << "P5\n" << x.cols << " " << x.rows << "\n65535\n";
    for (double v : x.data) {
        if (v < 0.0 || v > 1.0) clipped = true;
        const double c = std::clamp(v, 0.0, 1.0);
        const auto q = static_cast<std::uint16_t>(std::lround(c * 65535.0));
        const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                        static_cast<unsigned char>(q & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
    if (!out) throw GraymapError("write_graymap: write failed for " + path);
    if (clipped) std::cerr << "write_graymap: values outside [0,1] clamped in " << path << "\n";
}

inline Signal read_graymap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraymapError("read_graymap: cannot open " + path);

    auto next_token = [&in, &path]() {
        std::string tok;
        while (true) {
            int c = in.get();
            if (c == EOF) throw GraymapError("read_graymap: truncated header in " + path);
            if (c == '#') {  // comment to end of line
                while (c != '\n' && c != EOF) c = in.get();
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
    };

    if (next_token() != "P5") throw GraymapError("read_graymap: not a binary graymap: " + path);
    const long w = std::stol(next_token());
    const long h = std::stol(next_token());
    const long maxval = std::stol(next_token());
    if (w <= 0 || h <= 0) throw GraymapError("read_graymap: bad dimensions in " + path);
    if (maxval != 65535) throw GraymapError("read_graymap: expected 16-bit maxval in " + path);

    Signal img(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
    for (double& v : img.data) {
        unsigned char bytes[2];
        in.read(reinterpret_cast<char*>(bytes), 2);
        if (!in) throw GraymapError("read_graymap: truncated payload in " + path);
        const std::uint16_t q = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
        v = static_cast<double>(q) / 65535.0;
    }
    return img;
}

}  // namespace risp
