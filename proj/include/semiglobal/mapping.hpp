#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace semiglobal {

enum class MapKind { linear, algebraic_semi_infinite, rational_offset };

/** Invertible coordinate transform from the reference interval [-1,1] to a
 *  physical interval, with analytic metric d(forward)/dx.
 *
 *  linear:                y = (a-b)/2 * x + (a+b)/2          (y(1)=a, y(-1)=b)
 *  algebraic_semi_infinite: y = r_c*l1*(1-x) / (2*r_c + l1*(1-x^2))
 *                                                            (y(1)=0, y(-1)=l1)
 *  rational_offset:       y = l*(1-x)/(bp+x) + off           (y(1)=off; bp>1)
 */
struct Mapping {
  MapKind kind = MapKind::linear;
  double a = 0, b = 0;    // linear endpoints
  double r_c = 0, l1 = 0; // algebraic parameters
  double l = 0, bp = 0, off = 0; // rational parameters

  double forward(double x) const {
    switch (kind) {
      case MapKind::linear:
        return 0.5 * (a - b) * x + 0.5 * (a + b);
      case MapKind::algebraic_semi_infinite:
        return r_c * l1 * (1.0 - x) / (2.0 * r_c + l1 * (1.0 - x * x));
      case MapKind::rational_offset:
        return l * (1.0 - x) / (bp + x) + off;
    }
    return 0;
  }

  double metric(double x) const {
    switch (kind) {
      case MapKind::linear:
        return 0.5 * (a - b);
      case MapKind::algebraic_semi_infinite: {
        const double v = 2.0 * r_c + l1 * (1.0 - x * x);
        return -r_c * l1 * (2.0 * r_c + l1 * (1.0 - x) * (1.0 - x)) / (v * v);
      }
      case MapKind::rational_offset:
        return -l * (bp + 1.0) / ((bp + x) * (bp + x));
    }
    return 0;
  }
};

namespace detail {

// strict monotonicity and nonvanishing metric, sampled densely
inline void validate_mapping(const Mapping& m) {
  const int samples = 1001;
  const double span = std::abs(m.forward(1.0) - m.forward(-1.0));
  if (!(span > 0)) throw std::invalid_argument("Mapping: degenerate image interval");
  double prev = m.forward(-1.0);
  const int dir = (m.forward(1.0) > prev) ? 1 : -1;
  for (int i = 1; i < samples; ++i) {
    const double x = -1.0 + 2.0 * i / (samples - 1);
    const double y = m.forward(x);
    if (dir * (y - prev) <= 0)
      throw std::invalid_argument("Mapping: forward(x) not strictly monotone on [-1,1]");
    prev = y;
  }
  for (int i = 0; i < samples; ++i) {
    const double x = -1.0 + 2.0 * i / (samples - 1);
    if (std::abs(m.metric(x)) < 1e-14 * span)
      throw std::invalid_argument("Mapping: metric vanishes inside [-1,1]");
  }
}

}  // namespace detail

inline Mapping linear_map(double a, double b) {
  if (a == b) throw std::invalid_argument("linear_map: endpoints coincide");
  Mapping m;
  m.kind = MapKind::linear;
  m.a = a;
  m.b = b;
  return m;
}

inline Mapping algebraic_map(double r_c, double l1) {
  if (!(r_c > 0) || !(l1 > 0))
    throw std::invalid_argument("algebraic_map: need r_c > 0 and l1 > 0");
  Mapping m;
  m.kind = MapKind::algebraic_semi_infinite;
  m.r_c = r_c;
  m.l1 = l1;
  detail::validate_mapping(m);
  return m;
}

inline Mapping rational_map(double l, double bp, double off) {
  if (!(bp > 1.0))
    throw std::invalid_argument("rational_map: need b > 1 (pole at x = -b must lie outside [-1,1]), got " +
                                std::to_string(bp));
  if (!(l > 0)) throw std::invalid_argument("rational_map: need l > 0");
  Mapping m;
  m.kind = MapKind::rational_offset;
  m.l = l;
  m.bp = bp;
  m.off = off;
  detail::validate_mapping(m);
  return m;
}

}  // namespace semiglobal
