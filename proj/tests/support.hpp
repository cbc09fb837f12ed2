#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "rfm/manifolds.hpp"
#include "rfm/rng.hpp"

namespace rfm::test {

inline ManifoldPoint random_point(const Manifold& m, CounterRng& rng) {
  switch (m.kind()) {
    case ModelKind::Euclidean: {
      Eigen::VectorXd v(m.dim());
      for (int i = 0; i < m.dim(); ++i) v[i] = 2.0 * rng.normal();
      return m.point(v);
    }
    case ModelKind::Circle: return m.point({rng.uniform(-kPi, kPi)});
    case ModelKind::Sphere: {
      Eigen::VectorXd v(3);
      v << rng.normal(), rng.normal(), rng.normal();
      return m.point(v / v.norm());
    }
    case ModelKind::Torus: return m.point({rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi)});
    case ModelKind::Cylinder: return m.point({rng.uniform(-kPi, kPi), 2.0 * rng.normal()});
    case ModelKind::Hyperbolic: return m.point({rng.uniform(-3.0, 3.0), std::exp(rng.uniform(-1.5, 1.5))});
    case ModelKind::Trumpet: return m.point({rng.uniform(-kPi, kPi), std::exp(rng.uniform(-1.5, 1.5))});
  }
  return m.point({0.0});
}

inline std::vector<Manifold> all_models() {
  return {Manifold::euclidean(1), Manifold::euclidean(2), Manifold::euclidean(3), Manifold::circle(),
          Manifold::sphere(),     Manifold::torus(),       Manifold::cylinder(),    Manifold::hyperbolic(),
          Manifold::trumpet()};
}

// Long-double reimplementation of exp (frame coefficients) and distance for
// the curved and quotient 2-D models, used as a finite-difference oracle.
namespace ld {

using L = long double;
using C = std::complex<L>;
inline constexpr L kPiL = 3.141592653589793238462643383279502884L;

inline L wrap(L d) { return std::remainderl(d, 2 * kPiL); }

struct P3 {
  L x, y, z;
};
inline P3 cross(P3 a, P3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline L dot(P3 a, P3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline L norm(P3 a) { return std::sqrt(dot(a, a)); }

// Frame at b: e1 = normalized projection of x-hat (y-hat when |b_x| > 0.9),
// e2 = b x e1.
inline void sphere_frame(P3 b, P3& e1, P3& e2) {
  P3 ref = std::abs(b.x) > 0.9L ? P3{0, 1, 0} : P3{1, 0, 0};
  const L c = dot(ref, b);
  P3 t{ref.x - c * b.x, ref.y - c * b.y, ref.z - c * b.z};
  const L n = norm(t);
  e1 = {t.x / n, t.y / n, t.z / n};
  e2 = cross(b, e1);
}

inline C half_plane_exp(L x, L y, L v1, L v2) {
  const L t = std::hypot(v1, v2);
  if (t == 0) return {x, y};
  const C u(v1 / t, v2 / t);
  const C zeta = std::tanh(t / 2) * (C(0, -1) * u);
  const C w = C(0, 1) * (C(1) + zeta) / (C(1) - zeta);
  return {x + y * w.real(), y * w.imag()};
}

inline L half_plane_dist(L x1, L y1, L x2, L y2) {
  return 2 * std::asinh(std::hypot(x1 - x2, y1 - y2) / (2 * std::sqrt(y1 * y2)));
}

// d^2(exp_q(v), p) for v in frame coefficients at q.
inline L sq_dist_after_exp(const Manifold& m, const ManifoldPoint& q, L v1, L v2, const ManifoldPoint& p) {
  switch (m.kind()) {
    case ModelKind::Sphere: {
      const P3 b{q.coords[0], q.coords[1], q.coords[2]};
      P3 e1, e2;
      sphere_frame(b, e1, e2);
      const L t = std::hypot(v1, v2);
      P3 r = b;
      if (t > 0) {
        const L c = std::cos(t), s = std::sin(t) / t;
        r = {c * b.x + s * (v1 * e1.x + v2 * e2.x), c * b.y + s * (v1 * e1.y + v2 * e2.y),
             c * b.z + s * (v1 * e1.z + v2 * e2.z)};
      }
      const P3 pp{p.coords[0], p.coords[1], p.coords[2]};
      const L d = std::atan2(norm(cross(r, pp)), dot(r, pp));
      return d * d;
    }
    case ModelKind::Cylinder: {
      const L dx = wrap(static_cast<L>(q.coords[0]) + v1 - p.coords[0]);
      const L dy = static_cast<L>(q.coords[1]) + v2 - p.coords[1];
      return dx * dx + dy * dy;
    }
    case ModelKind::Hyperbolic: {
      const C z = half_plane_exp(q.coords[0], q.coords[1], v1, v2);
      const L d = half_plane_dist(z.real(), z.imag(), p.coords[0], p.coords[1]);
      return d * d;
    }
    case ModelKind::Trumpet: {
      const C z = half_plane_exp(q.coords[0], q.coords[1], v1, v2);
      const L dx = wrap(z.real() - p.coords[0]);
      L best = 1e300L;
      for (int k = -1; k <= 1; ++k) {
        best = std::min(best, half_plane_dist(dx + 2 * kPiL * k, z.imag(), 0, p.coords[1]));
      }
      return best * best;
    }
    default: break;
  }
  return 0;
}

// Central-difference Hessian with step h.
inline Eigen::Matrix2d fd_hessian(const Manifold& m, const ManifoldPoint& q, const ManifoldPoint& p, L h) {
  auto f = [&](L a, L b) { return sq_dist_after_exp(m, q, a, b, p); };
  const L f0 = f(0, 0);
  Eigen::Matrix2d H;
  H(0, 0) = static_cast<double>((f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h));
  H(1, 1) = static_cast<double>((f(0, h) - 2 * f0 + f(0, -h)) / (h * h));
  H(0, 1) = H(1, 0) = static_cast<double>((f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h));
  return H;
}

}  // namespace ld

}  // namespace rfm::test
