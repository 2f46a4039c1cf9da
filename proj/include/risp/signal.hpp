#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace risp {

/// Raised when signal shapes or dimensions do not match an operation's contract.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Real-valued vector, optionally carrying a 2-D image shape (rows x cols).
/// A shapeless signal has rows == cols == 0.
struct Signal {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    Signal() = default;
    explicit Signal(std::size_t d) : data(d, 0.0) {}
    Signal(std::size_t r, std::size_t c) : data(r * c, 0.0), rows(r), cols(c) {}
    Signal(std::vector<double> values, std::size_t r, std::size_t c)
        : data(std::move(values)), rows(r), cols(c) {
        if (r * c != data.size()) throw ShapeError("signal shape does not match length");
    }
    explicit Signal(std::vector<double> values) : data(std::move(values)) {}

    std::size_t size() const { return data.size(); }
    bool has_shape() const { return rows > 0 && cols > 0; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Complex spectrum of a 2-D signal. Always shaped.
struct Spectrum {
    std::vector<std::complex<double>> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    Spectrum() = default;
    Spectrum(std::size_t r, std::size_t c) : data(r * c, {0.0, 0.0}), rows(r), cols(c) {}

    std::size_t size() const { return data.size(); }
    std::complex<double>& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::complex<double> at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline void require_same_size(const Signal& a, const Signal& b, const char* where) {
    if (a.size() != b.size())
        throw ShapeError(std::string(where) + ": size mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
}

inline void require_shape(const Signal& s, const char* where) {
    if (!s.has_shape()) throw ShapeError(std::string(where) + ": signal has no 2-D shape");
}

inline double dot(const Signal& a, const Signal& b) {
    require_same_size(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const Signal& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v * v;
    return acc;
}

inline double norm(const Signal& a) { return std::sqrt(norm2(a)); }

inline double linf(const Signal& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(const Signal& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline Signal operator+(const Signal& a, const Signal& b) {
    require_same_size(a, b, "operator+");
    Signal out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

inline Signal operator-(const Signal& a, const Signal& b) {
    require_same_size(a, b, "operator-");
    Signal out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

inline Signal operator*(double c, const Signal& a) {
    Signal out = a;
    for (double& v : out.data) v *= c;
    return out;
}

inline Signal& operator+=(Signal& a, const Signal& b) {
    require_same_size(a, b, "operator+=");
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

inline Signal& operator-=(Signal& a, const Signal& b) {
    require_same_size(a, b, "operator-=");
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
    return a;
}

/// a += c * b without a temporary.
inline void axpy(Signal& a, double c, const Signal& b) {
    require_same_size(a, b, "axpy");
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += c * b[i];
}

inline Signal hadamard(const Signal& a, const Signal& b) {
    require_same_size(a, b, "hadamard");
    Signal out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out[i] *= b[i];
    return out;
}

inline Signal clamp01(const Signal& a) {
    Signal out = a;
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

/// Carries the signal's values with a new shape (h*w must equal size).
inline Signal reshaped(const Signal& a, std::size_t r, std::size_t c) {
    if (r * c != a.size()) throw ShapeError("reshaped: incompatible shape");
    Signal out = a;
    out.rows = r;
    out.cols = c;
    return out;
}

}  // namespace risp
