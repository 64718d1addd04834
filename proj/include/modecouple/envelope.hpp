#pragma once

namespace modecouple {

enum class EnvelopeKind { rectangular, blackman };

const char* to_string(EnvelopeKind kind) noexcept;

/// Pulse window. Zero outside [start, start + duration].
struct Envelope {
  static constexpr double blackman_alpha = 0.16;
  /// Area of the Blackman window relative to its length.
  static constexpr double blackman_area_fraction = 0.42;

  EnvelopeKind kind = EnvelopeKind::rectangular;
  double duration = 0.0;
  double start = 0.0;

  double operator()(double t) const;
  /// Exact integral of the window over [t0, t1].
  double integral(double t0, double t1) const;
  double area() const { return integral(start, start + duration); }
  /// Largest value of the window (1 for both kinds).
  static constexpr double peak() { return 1.0; }
};

/// Window length giving the same area as a rectangle of length t_rect.
double equal_area_duration(EnvelopeKind kind, double t_rect);

}  // namespace modecouple
