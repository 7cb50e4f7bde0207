#pragma once

#include <cstdint>
#include <random>

#include "matflow/matrix.hpp"

namespace matflow {

/// Seeded generator used for every sampled experiment.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits: u = (x >> 11) * 2^-53. Normals use
/// the Box-Muller cosine branch, consuming two uniforms per draw:
/// sqrt(-2 ln(1 - u1)) * cos(2 pi u2). Complex normals draw the real part
/// first, then the imaginary part, each N(0, 1). Nothing here depends on
/// implementation-defined distributions, so sequences are reproducible from the
/// seed on any platform.
class Rng {
public:
    static constexpr const char* algorithm = "mt19937_64/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double normal();
    Complex complex_normal();

private:
    std::mt19937_64 engine_;
};

/// Per-item seed for item `index` of a run seeded with `seed` (splitmix64 of
/// seed + (index + 1) * golden gamma).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Matrix with independent complex normal entries, filled column-major.
Matrix random_gaussian(std::size_t n, Rng& rng);
/// (G + G^dagger) / 2.
Matrix random_hermitian(std::size_t n, Rng& rng);
/// B^dagger B.
Matrix random_psd(std::size_t n, Rng& rng);
/// Gram-Schmidt orthonormalization of the columns of a Gaussian matrix.
Matrix random_unitary(std::size_t n, Rng& rng);

} // namespace matflow
