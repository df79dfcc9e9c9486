#pragma once

namespace locbound::model {

/// Channel-side parameters of the received-signal model. Amplitude decays as
/// d^(-gamma/2); `we` is the effective bandwidth (integral of the squared
/// pulse derivative over the pulse energy, units s^-2); `rho` is the linear
/// SNR at one meter under the Es/(2*N0) convention used throughout.
struct ChannelParams {
  double gamma;
  double c = 3e8;    // propagation speed, m/s
  double we = 0.0;   // effective bandwidth, s^-2
  double rho = 1.0;  // linear SNR, dimensionless

  /// gamma must exceed 2: the aggregate path-gain sum over an infinite field
  /// is only finite for gamma > 2, and the wideband closed form needs
  /// Gamma(1 - 2/gamma) finite.
  ChannelParams(double gamma, double c, double we, double rho);
};

/// Raised-cosine pulse (1 - cos(2*pi*t/T)) on [0, T], described by its
/// duration, received energy at one meter, and noise spectral density N0
/// (the white-noise two-sided density is N0/2). The transmit-gain constant is
/// folded into `es`; nothing downstream needs it separately.
struct Pulse {
  double t_dur;  // T, seconds
  double es;     // pulse energy at 1 m, joules
  double n0;     // N0, joules

  Pulse(double t_dur, double es, double n0);
};

/// W_e = 4*pi^2 / (3*T^2) for the raised-cosine pulse.
double effective_bandwidth(const Pulse& p);

/// Per-sensor information kernel g(d) = d^(-gamma-2) * (gamma^2 + 4*we*d^2/c^2).
/// The first term carries the signal-strength information, the second the
/// arrival-time information. Throws std::domain_error for d <= 0.
double g_kernel(double d, const ChannelParams& ch);

/// Closed-form pulse autocorrelation, normalized so pulse_autocorr(0) == es.
/// Even in delta, identically zero for |delta| >= T.
double pulse_autocorr(double delta, const Pulse& p);

/// dB to linear power ratio: 10^(db/10). Throws std::domain_error for
/// non-finite input.
double snr_from_db(double db);

}  // namespace locbound::model
