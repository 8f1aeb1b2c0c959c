#pragma once

#include <optional>
#include <vector>

#include "qsmooth/calculus.hpp"
#include "qsmooth/cutoffs.hpp"
#include "qsmooth/propagator.hpp"

namespace qsmooth {

// Half-space Fourier projector relative to a ball cutoff: multiply by
// psi_tilde, transform, keep the lattice half-space sign(k.direction) = side.
// Modes with k.direction == 0 (the xi_1 = 0 plane, and the Nyquist plane
// where the sign is ambiguous) are weighted 1/2 to each side, so
// P_in + P_out = psi_tilde (multiplication) exactly.
struct HalfSpaceProjector {
    Vec3 direction{1, 0, 0};
    double R = 0;
    BallCutoff psi_tilde;
    int side = +1;  // +1: outgoing (k.e > 0), -1: incoming (k.e < 0)
};

HalfSpaceProjector make_half_projector(const CutoffFamily& cutoffs, double R,
                                       int side);

WaveField apply_half_projector(const HalfSpaceProjector& p, const WaveField& f);

// || (1-phi_R) H0^2 f - sum_b w_b H0^2 (P_in,b + P_out,b) f || / || (1-phi_R) H0^2 f ||
// with the dyadic-shell/sector assembly of (1-phi_R): shells [2^m R, 2^(m+1) R]
// and `sectors` direction pieces per shell (per coordinate plane in 3D), each
// piece carrying its own half-space pair along the sector direction. The
// partition telescopes exactly; the residual measures only the spectral
// locality error of H0^2 across the cover margins.
struct DyadicConfig {
    int shells = 3;
    int sectors = 6;             // per dimension pair
    double radial_smooth = 0.3;  // transition widths, units of the shell radius
    double cover_margin = 0.35;  // psi_tilde_b margin beyond the piece support
};

double decomposition_residual(const WaveField& f, double R,
                              const CutoffFamily& cutoffs,
                              const DyadicConfig& cfg = {});

// Single-ball variant: psi in place of (1-phi_R); exact (roundoff) for data
// supported inside the psi_tilde plateau.
double decomposition_residual_single_ball(const WaveField& f, double R,
                                          const CutoffFamily& cutoffs);

struct DecayRow {
    int probe = 0;
    double R = 0;
    double s = 0;
    double value = 0;
    bool used = true;  // false when below the numerical floor
};

struct DecayScan {
    std::vector<DecayRow> rows;
    // worst case over probes (the acceptance bound is one-sided)
    double exponent = 0;
    double constant = 0;
    double log_rms = 0;
    std::vector<double> probe_exponent, probe_constant, probe_rms;
    int m_cap = 4, l_cap = 4;
    double floor = 1e-13;
};

struct DecayScanConfig {
    std::vector<double> R_list;
    std::vector<double> s_list;   // shared decade of times, applied per R
    double sigma = 0.1;
    int m_cap = 4;                // (1+H)^(m/2) realization cap
    int l_cap = 4;                // <x>^l realization cap
    double floor = 1e-13;
};

// || <x>^(3/2+sigma) psi_R H0^2 P_out exp(-isH0) f || per (R, s, probe),
// normalized by || <x>^l_cap (1+H0)^(m_cap/2) f ||; log-log least squares of
// value against (R^2+s). Probes are indexed per R (ball-local data).
DecayScan outgoing_decay_scan(const DecayScanConfig& cfg,
                              const CutoffFamily& cutoffs,
                              const Propagator& flat_prop,
                              const std::vector<std::vector<WaveField>>& probes);

// || <x>^(-l_cap) (1+H0) exp(isH0) psi_R H0^2 P_in f || per (R, s, probe),
// normalized by || (1+H0)^(m_cap/2) f ||. exp(isH0) is backward evolution.
DecayScan incoming_decay_scan(const DecayScanConfig& cfg,
                              const CutoffFamily& cutoffs,
                              const Propagator& flat_prop,
                              const std::vector<std::vector<WaveField>>& probes);

struct RageRow {
    double T = 0;
    double average = 0;  // (1/T) int_0^T ||C exp(-itH) u0||^2 dt
};

// C = phi_R multiplication, optionally composed with P_med (applied once to
// u0: spectral multipliers commute with the propagator).
struct CompactLocalizer {
    double R = 0;
    std::optional<double> med_eps0;
};

std::vector<RageRow> rage_average(const CompactLocalizer& c, const WaveField& u0,
                                  const std::vector<double>& T_grid,
                                  const Propagator& prop,
                                  const SpectralCalculus& calc,
                                  const CutoffFamily& cutoffs,
                                  double dt_report = 0.05);

struct RageLocalizedRow {
    double tau = 0;
    double value = 0;  // || phi_R exp(i tau H) P_med div_phi f || / || f ||
};

std::vector<RageLocalizedRow> rage_localized(
    double R, const std::vector<double>& tau_grid, double eps0,
    const std::array<WaveField, 3>& f_vec, const SpectralCalculus& calc,
    const CutoffFamily& cutoffs, const Propagator& prop);

}  // namespace qsmooth
