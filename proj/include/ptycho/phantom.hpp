#pragma once

#include "ptycho/field.hpp"

#include <cstdint>

namespace ptycho {

/// Complex test object built from random disks and rectangles on a gently varying
/// base: amplitude in roughly [0.35, 1], phase in roughly [-0.9, 0.9] rad.
ComplexField2D make_phantom(Shape shape, std::uint64_t seed);

struct ProbeSpec {
    std::size_t side = 64;
    /// Full width at half maximum of the Gaussian amplitude, in pixels.
    double fwhm = 7.0;
    /// Quadratic (defocus) phase coefficient, rad / px^2.
    double curvature = 0.0;
    /// Radius of the Fourier-space lens support in frequency pixels; <= 0 disables band limiting.
    double lens_radius = 0.0;
    /// Target ||probe||^2, i.e. expected counts per frame for a unit-modulus object.
    double photons_per_frame = 1e6;
};

/// Disk of the given radius around the zero frequency (unshifted DFT layout, DC at (0,0)).
RealField2D make_lens_mask(std::size_t side, double radius);

/// Centered Gaussian probe with optional chirp, band-limited to the lens mask when enabled.
ComplexField2D make_probe(const ProbeSpec& spec);

/// Smooth parasitic background in detector coordinates (DC at (0,0)): a soft ring and two
/// offset streaks, faded out near zero frequency. Peak value = `peak`.
RealField2D make_background(std::size_t side, double peak);

}  // namespace ptycho
