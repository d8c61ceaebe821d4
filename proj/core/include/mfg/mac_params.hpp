#pragma once

namespace mfg {

/// Parameters of the four-battery-level medium access game.
///
/// Powers are indexed by action: N (no transmission, power 0), L and H.
/// `beta_price` is the power price; `beta` is the discount factor.
struct MacParams {
  double P_L = 1.0;
  double P_H = 2.0;
  double sigma2 = 1.0;
  double Cbar = 1.0;
  double beta_price = 0.0;
  double alpha = 0.1;
  double gamma = 0.1;
  double p_F = 0.5;
  double T_msg = 1.0;
  double Rd = 1.0;
  double Rr = 1.0;
  double beta = 0.9;
  double mass = 1.0;

  double power(int action) const {
    switch (action) {
      case 1: return P_L;
      case 2: return P_H;
      default: return 0.0;
    }
  }
  /// Interference prefactor multiplying the transmit-power mass.
  double flow_factor() const { return Rd * T_msg * Cbar; }

  bool operator==(const MacParams&) const = default;
};

}  // namespace mfg
