#pragma once

#include <vector>

#include "wavedge/cwt.hpp"

namespace wavedge {

/// A 1-D modulus maximum: a local maximum of |Wf(., s)|.
struct ModMax1D {
  int pos = 0;
  double scale = 0.0;
  double value = 0.0;  // signed transform value, never zero

  int sign() const { return value > 0.0 ? 1 : -1; }
};

/// A 2-D modulus maximum along the gradient direction.
struct ModMax2D {
  int x = 0;  // column
  int y = 0;  // row
  double scale = 0.0;
  double value = 0.0;  // modulus, > 0
  double angle = 0.0;  // orientation Af in (-pi/2, 3pi/2]
};

struct BoundaryCurve {
  int id = 0;
  std::vector<ModMax2D> points;
};

enum class NmsMode { Bilinear, Quantized };

/// Interior u with |c[u]| > |c[u-1]|, |c[u]| >= |c[u+1]| and |c[u]| above the plane floor.
std::vector<ModMax1D> detect1d(const WaveletPlane1D& plane);

/// Directional non-maximum suppression. A pixel survives when its modulus strictly
/// exceeds the modulus at +/-1 pixel along (cos Af, sin Af). The one-pixel frame is skipped.
std::vector<ModMax2D> detect2d(const WaveletPlane2D& plane, NmsMode mode = NmsMode::Bilinear);

/// Partitions same-scale maxima into 8-connected chains whose consecutive angles
/// differ by less than pi/2. Seeds are taken in (row, col) order; each chain is
/// grown greedily from both ends of its seed.
std::vector<BoundaryCurve> chain_curves(const std::vector<ModMax2D>& maxima);

/// Wrapped difference a - b in (-pi, pi].
double angle_difference(double a, double b);

}  // namespace wavedge
