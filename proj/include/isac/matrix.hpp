#pragma once

#include <complex>
#include <span>
#include <vector>

namespace isac {

/// Row-major complex matrix. Rows index OFDM symbols, columns index
/// subcarriers (or time samples, depending on the pipeline stage).
struct ComplexMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::complex<double>> data;

    ComplexMatrix() = default;
    ComplexMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    std::complex<double>& operator()(int r, int c) {
        return data[static_cast<size_t>(r) * cols + c];
    }
    const std::complex<double>& operator()(int r, int c) const {
        return data[static_cast<size_t>(r) * cols + c];
    }
    std::span<std::complex<double>> row(int r) {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
    std::span<const std::complex<double>> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
};

}  // namespace isac
