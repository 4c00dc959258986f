// rng.hpp — Seeded RNG with a hand-rolled Box–Muller transform so streams are
// reproducible independent of the standard library's distribution internals.

#pragma once

#include "defectlab/matcore.hpp"

#include <cstdint>
#include <random>

namespace defectlab {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1).
    double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    Complex cgauss() { return Complex(gauss(), gauss()); }

    Matrix gaussian_matrix(int rows, int cols) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = cgauss();
        return m;
    }

    // Haar-like random unitary via QR of a Gaussian matrix with phase fixing.
    Matrix random_unitary(int d) {
        const Matrix g = gaussian_matrix(d, d);
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ();
        const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int k = 0; k < d; ++k) {
            const Complex diag = r(k, k);
            if (std::abs(diag) > 0) q.col(k) *= diag / std::abs(diag);
        }
        return q;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace defectlab
