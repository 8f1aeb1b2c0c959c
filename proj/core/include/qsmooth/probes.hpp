#pragma once

#include <vector>

#include "qsmooth/calculus.hpp"
#include "qsmooth/cutoffs.hpp"
#include "qsmooth/field.hpp"

namespace qsmooth {

// Versioned probe sets; v1 layouts are frozen (the K-plateau thresholds were
// calibrated against them).

// 12 Gaussians: 3 centers x 2 widths x 2 modulations, scaled by R0.
std::vector<WaveField> smoothing_probe_set(int version,
                                           std::shared_ptr<const MetricField> m);

// Medium-frequency datum concentrated on the trapped circular orbit.
WaveField orbit_probe(std::shared_ptr<const MetricField> m, double r_orbit,
                      int angular_index);

// Decay-scan probes for one ball radius R: smooth ball bumps modulated at
// three frequencies plus one medium-band random field restricted to the ball.
std::vector<WaveField> decay_probe_set(int version,
                                       std::shared_ptr<const MetricField> m,
                                       const CutoffFamily& cutoffs, double R,
                                       std::uint64_t seed);

// Band-limited random field: white noise filtered to a Gaussian spectral
// envelope exp(-|k|^2/k0^2); smooth-spectrum data keeps spectral operators
// effectively local.
WaveField band_limited_noise(std::shared_ptr<const MetricField> m, double k0,
                             std::uint64_t seed);

// Divergence-probe vector field for the localized RAGE test.
std::array<WaveField, 3> rage_vector_probe(std::shared_ptr<const MetricField> m,
                                           std::uint64_t seed);

}  // namespace qsmooth
